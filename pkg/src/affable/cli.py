"""Command-line entry point.

Report lines (STAGE / MARGIN / VALUE) go to standard output; data files are
written with --out and friends.  Exit status is 0 iff every reported stage
passed, 1 if a stage failed and 2 for unusable input.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Callable

from affable import textio
from affable.absorption import (
    AbsorptionError,
    Templates,
    build_absorption_diagram,
    check_absorption,
    plant_replicas,
    shift_map_alpha,
    star_margin,
    verify_star,
    verify_star_bruteforce,
)
from affable.afstructure import (
    TransverseBuildError,
    check_transverse_build,
    diagram_from_filtration,
    round_trip_report,
    transverse_diagrams,
)
from affable.demo import two_point_demo
from affable.diagram import (
    DEFAULT_ENUMERATION_CAP,
    DiagramError,
    EnumerationCapExceeded,
    count_paths,
    enumerate_paths,
    validate_diagram,
    validate_quotient,
    validate_subdiagram,
)
from affable.dot import emit_dot
from affable.relations import (
    NotFree,
    NotTransverse,
    RelationError,
    class_size_check,
    find_transversal,
    join,
    relation_from_group_action,
    transverse_filtration,
    verify_witness,
)
from affable.report import margin_line, stage_line, value_line
from affable.transforms import (
    DEFAULT_STEP_BUDGET,
    CapacityError,
    CapacityRequest,
    ensure_capacity,
    microscope,
    simplicity_window,
    telescope,
    thinness_bound,
)


class UsageError(Exception):
    """Flags or inputs that prevent a subcommand from running."""


class Output:
    """Collects report lines and tracks whether every stage passed."""

    def __init__(self, stream=None):
        self.lines: list[str] = []
        self.passed = True
        self.stream = stream or sys.stdout

    def stage(self, name: str, passed: bool, detail: str = "") -> None:
        self.passed &= bool(passed)
        self._emit(stage_line(name, passed, detail))

    def margin(self, n: int, depth: int) -> None:
        self._emit(margin_line(n, depth))

    def value(self, key: str, value: object) -> None:
        self._emit(value_line(key, value))

    def _emit(self, line: str) -> None:
        self.lines.append(line)
        print(line, file=self.stream)


# ----------------------------------------------------------------- parsing


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rational(text: str) -> Fraction:
    if "." in text or "e" in text.lower():
        raise argparse.ArgumentTypeError(f"rationals are written p/q, got {text!r}")
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational p/q: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("epsilon must be nonnegative")
    return value


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return value


def _load_diagram(path: str):
    return textio.parse_diagram(textio.read_text(path))


def _load_subdiagram(path: str, host_path: str | None):
    text = textio.read_text(path)
    ref = host_path or textio.read_headers(text).get("HOST")
    if ref is None:
        raise UsageError(f"{path}: no HOST header and no --host given")
    host_file = ref if host_path else textio.resolve(ref, path)
    host = _load_diagram(host_file)
    return host, textio.parse_subdiagram(text, host)


def _load_quotient(path: str, source_path: str | None = None, target_path: str | None = None):
    text = textio.read_text(path)
    headers = textio.read_headers(text)
    files = []
    for given, key in ((source_path, "SOURCE"), (target_path, "TARGET")):
        if given:
            files.append(given)
        elif key in headers:
            files.append(textio.resolve(headers[key], path))
        else:
            raise UsageError(f"{path}: no {key} header and no --{key.lower()} given")
    source, target = _load_diagram(files[0]), _load_diagram(files[1])
    return textio.parse_quotient(text, source, target)


def _write(path: str | FsPath, text: str) -> None:
    FsPath(path).write_text(text, encoding="utf-8")


def _relative(target: str | FsPath, base: str | FsPath) -> str:
    """Path of `target` as seen from the directory of `base`, for HOST-style headers."""
    import os
    return os.path.relpath(FsPath(target).resolve(), FsPath(base).resolve().parent)


def _absorption_inputs(args):
    host, y_sub = _load_subdiagram(args.sub, args.host)
    q = _load_quotient(args.templates)
    return host, y_sub, Templates(q)


# --------------------------------------------------------------- commands


def cmd_validate(args, out: Output) -> None:
    text = textio.read_text(args.file)
    kinds = {fields[0] for _, fields in textio.records(text)}
    if "STRICT" in kinds:
        q = _load_quotient(args.file, args.source, args.target)
        report = validate_quotient(q)
        out.stage("quotient", report.ok, report.summary())
        notes: dict[str, list[str]] = {}
        for issue in report.issues:
            if issue.severity != "error":
                notes.setdefault(issue.code, []).append(str(issue.level))
        for code, levels in notes.items():
            out.value(f"info.{code}", ",".join(dict.fromkeys(levels)))
    elif "S" in kinds:
        _, sub = _load_subdiagram(args.file, args.host)
        report = validate_subdiagram(sub)
        out.stage("subdiagram", report.ok, report.summary())
    else:
        d = textio.parse_diagram(text)
        report = validate_diagram(d)
        out.stage("diagram", report.ok, report.summary())
        out.value("depth", d.depth)
        out.value("vertices", d.num_vertices())
        out.value("edges", d.num_edges())


def cmd_paths(args, out: Output) -> None:
    d = _load_diagram(args.diagram)
    if args.level > d.depth:
        raise UsageError(f"level {args.level} beyond depth {d.depth}")
    counts = count_paths(d, args.level)
    for v in d.vertices(args.level):
        out.value(f"paths.{v}", counts[v])
    out.value("paths", counts.total())
    if args.out:
        paths = enumerate_paths(d, args.level, args.cap)
        _write(args.out, "".join(" ".join(p) + "\n" for p in paths))
    out.stage("paths", True, f"level {args.level}")


def cmd_telescope(args, out: Output) -> None:
    d = _load_diagram(args.diagram)
    t, recoding = telescope(d, args.cuts)
    _write(args.out, textio.emit_diagram(t))
    out.value("depth", t.depth)
    out.stage("telescope", validate_diagram(t).ok, f"cuts {','.join(map(str, args.cuts))}")


def cmd_microscope(args, out: Output) -> None:
    d = _load_diagram(args.diagram)
    m, _ = microscope(d, args.level)
    _write(args.out, textio.emit_diagram(m))
    out.value("depth", m.depth)
    out.stage("microscope", validate_diagram(m).ok, f"level {args.level}")


def cmd_capacity(args, out: Output) -> None:
    d = _load_diagram(args.diagram)
    request = CapacityRequest(args.cap_a, args.cap_b)
    try:
        result, recoding = ensure_capacity(d, request, args.step_budget)
    except CapacityError as exc:
        out.stage("capacity", False, str(exc))
        return
    _write(args.out, textio.emit_diagram(result))
    out.value("steps", recoding.num_steps)
    out.value("depth", result.depth)
    out.stage("capacity", True, f"a={','.join(map(str, args.cap_a))} b={','.join(map(str, args.cap_b))}")


def cmd_simple(args, out: Output) -> None:
    d = _load_diagram(args.diagram)
    windows = simplicity_window(d)
    for n, m in windows.windows.items():
        out.value(f"window.{n}", m)
    detail = "every level has a window" if windows.ok else f"no window at levels {','.join(map(str, windows.failures))}"
    out.stage("simple", windows.ok, detail)


def cmd_thin(args, out: Output) -> None:
    host, sub = _load_subdiagram(args.sub, args.host)
    depth = host.depth if args.depth is None else args.depth
    if not 0 <= depth <= host.depth:
        raise UsageError(f"depth {depth} outside 0..{host.depth}")
    bound = thinness_bound(sub, depth)
    out.value("bound", bound)
    out.value("eps", args.eps)
    out.stage("thin", bound <= args.eps, f"depth {depth}")


def cmd_rel_join(args, out: Output) -> None:
    r, s = textio.parse_relation(textio.read_text(args.r)), textio.parse_relation(textio.read_text(args.s))
    j = join(r, s)
    if args.out:
        _write(args.out, textio.emit_relation(j))
    out.value("classes", len(j.classes))
    out.stage("join", True)


def cmd_rel_transversal(args, out: Output) -> None:
    r, s = textio.parse_relation(textio.read_text(args.r)), textio.parse_relation(textio.read_text(args.s))
    try:
        witness = find_transversal(r, s)
    except NotTransverse as exc:
        detail = exc.reason if exc.pair is None else f"{exc.reason}; pair {exc.pair[0]} {exc.pair[1]}"
        out.stage("transversal", False, detail)
        return
    report = verify_witness(witness)
    report.extend(class_size_check(witness))
    out.value("composable", len(witness.rewrite))
    out.value("join-pairs", join(r, s).num_pairs())
    out.stage("transversal", report.ok, report.summary())


def cmd_rel_filtration(args, out: Output) -> None:
    chain = textio.parse_chain(textio.read_text(args.chain))
    s = textio.parse_relation(textio.read_text(args.s))
    try:
        witness = find_transversal(chain[-1], s)
    except NotTransverse as exc:
        out.stage("filtration", False, f"top of chain: {exc.reason}")
        return
    shrunk = transverse_filtration(chain, witness)
    if args.out:
        _write(args.out, textio.emit_chain(shrunk))
    out.value("length", len(shrunk))
    out.stage("filtration", True)


def cmd_rel_from_action(args, out: Output) -> None:
    points, generators = textio.parse_permutations(textio.read_text(args.perms))
    try:
        r = relation_from_group_action(points, generators)
    except NotFree as exc:
        out.stage("action", False, str(exc))
        return
    if args.out:
        _write(args.out, textio.emit_relation(r))
    out.value("classes", len(r.classes))
    out.stage("action", True, "free")


def cmd_build_diagram(args, out: Output) -> None:
    chain = textio.parse_chain(textio.read_text(args.chain))
    fd = diagram_from_filtration(chain[0].points, chain)
    _write(args.out, textio.emit_diagram(fd.diagram))
    report = round_trip_report(fd, args.cap)
    out.value("depth", fd.diagram.depth)
    out.stage("round-trip", report.ok, report.summary())


def cmd_transverse_build(args, out: Output) -> None:
    chain = textio.parse_chain(textio.read_text(args.chain))
    s = textio.parse_relation(textio.read_text(args.s))
    try:
        tb = transverse_diagrams(chain[0].points, chain, s)
    except NotTransverse as exc:
        out.stage("transverse-build", False, exc.reason)
        return
    except TransverseBuildError as exc:
        out.stage("transverse-build", False, exc.report.summary())
        return
    base = FsPath(args.out_dir)
    base.mkdir(parents=True, exist_ok=True)
    _write(base / "small.txt", textio.emit_diagram(tb.d))
    _write(base / "large.txt", textio.emit_diagram(tb.d_prime))
    _write(base / "quotient.txt", textio.emit_quotient(tb.quotient, {"SOURCE": "small.txt", "TARGET": "large.txt"}))
    report = check_transverse_build(tb, args.cap)
    out.value("shift", tb.shift)
    out.value("depth", tb.d.depth)
    out.stage("transverse-build", report.ok, report.summary())


def cmd_plant(args, out: Output) -> None:
    host, y_sub, templates = _absorption_inputs(args)
    scaffold = plant_replicas(host, y_sub, templates, seed=args.seed)
    out.stage("plant", True, f"{len(scaffold.replicas)} replicas")
    out.value("spine", ".".join(scaffold.spine))
    for name, value in scaffold.thinness.items():
        out.value(f"thinness.{name}", value)
    if args.out:
        headers = {"HOST": _relative(args.host or _host_of(args.sub), args.out)}
        _write(args.out, textio.emit_subdiagram(scaffold.l_prime_sub, headers))


def _host_of(sub_path: str) -> FsPath:
    return textio.resolve(textio.read_headers(textio.read_text(sub_path))["HOST"], sub_path)


def _absorb(args):
    host, y_sub, templates = _absorption_inputs(args)
    scaffold = plant_replicas(host, y_sub, templates, seed=args.seed)
    return build_absorption_diagram(scaffold, check=False, cap=args.cap)


def cmd_absorb(args, out: Output) -> None:
    result = _absorb(args)
    report = check_absorption(result, args.cap)
    out.stage("absorb", report.ok, report.summary())
    out.value("vertices", result.rewritten.num_vertices())
    out.value("edges", result.rewritten.num_edges())
    if args.out_dir:
        base = FsPath(args.out_dir)
        base.mkdir(parents=True, exist_ok=True)
        _write(base / "rewritten.txt", textio.emit_diagram(result.rewritten))
        _write(base / "host.txt", textio.emit_diagram(result.scaffold.host))
        _write(base / "quotient.txt", textio.emit_quotient(
            result.quotient, {"SOURCE": "rewritten.txt", "TARGET": "host.txt"}))


def cmd_alpha(args, out: Output) -> None:
    result = _absorb(args)
    alpha = shift_map_alpha(result, args.depth)
    out.value("paths", len(alpha.forward))
    out.stage("alpha", alpha.ok, alpha.report.summary())
    if args.out:
        _write(args.out, "".join(f"{'.'.join(a)} {'.'.join(b)}\n" for a, b in alpha.forward.items()))


def cmd_verify_star(args, out: Output) -> None:
    result = _absorb(args)
    depth = result.depth if args.depth is None else args.depth
    if not 0 <= args.level < depth <= result.depth:
        raise UsageError(f"need 0 <= n < N <= {result.depth}, got n={args.level}, N={depth}")
    check = verify_star_bruteforce if args.brute else verify_star
    kwargs = {"cap": args.cap} if args.brute else {}
    star = check(result, args.level, depth, omit=args.omit, with_k=args.with_k, **kwargs)
    out.stage("sound", star.sound, f"{star.classes} closure classes")
    detail = f"n={args.level} N={depth}"
    if star.unreached:
        a, b = star.unreached[0]
        detail += f"; unreached {'.'.join(a)} vs {'.'.join(b)}"
    out.stage("complete", star.complete, detail)
    if not args.omit:
        out.margin(star_margin(result, depth, args.with_k), depth)


def cmd_demo(args, out: Output) -> None:
    if args.instance != "two-point":
        raise UsageError(f"unknown demo {args.instance!r}")
    run = two_point_demo(args.depth, seed=args.seed, cap=args.cap, exhaustive_lift_depth=args.exhaustive_lift)
    for stage in run.stages:
        out.stage(stage.name, stage.passed, stage.detail)
    for n, depth in run.margins:
        out.margin(n, depth)
    for key, value in run.values.items():
        if key != "seconds":
            out.value(key, value)
    if args.out_dir and run.result is not None:
        base = FsPath(args.out_dir)
        base.mkdir(parents=True, exist_ok=True)
        _write(base / "host.txt", textio.emit_diagram(run.host))
        _write(base / "rewritten.txt", textio.emit_diagram(run.result.rewritten))
        _write(base / "quotient.txt", textio.emit_quotient(
            run.result.quotient, {"SOURCE": "rewritten.txt", "TARGET": "host.txt"}))
        _write(base / "y.txt", textio.emit_subdiagram(run.scaffold.y_sub, {"HOST": "host.txt"}))
        _write(base / "w.txt", textio.emit_diagram(run.templates.w))
        _write(base / "w_prime.txt", textio.emit_diagram(run.templates.w_prime))
        _write(base / "templates.txt", textio.emit_quotient(
            run.templates.quotient, {"SOURCE": "w.txt", "TARGET": "w_prime.txt"}))
        _write(base / "replicas.txt", textio.emit_subdiagram(run.scaffold.l_prime_sub, {"HOST": "host.txt"}))


def cmd_dot(args, out: Output) -> None:
    text = textio.read_text(args.file)
    if any(fields[0] == "S" for _, fields in textio.records(text)):
        d, sub = _load_subdiagram(args.file, args.host)
    else:
        d, sub = textio.parse_diagram(text), None
    rendered = emit_dot(d, sub)
    if args.out:
        _write(args.out, rendered)
        out.stage("dot", True, f"{d.num_vertices()} nodes, {d.num_edges()} edges")
    else:
        sys.stdout.write(rendered)


# ------------------------------------------------------------------ parser


def _absorption_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sub", required=True, help="subdiagram Y of the host (HOST header or --host)")
    p.add_argument("--host", help="host diagram file, overriding the HOST header")
    p.add_argument("--templates", required=True, help="quotient W -> W' with SOURCE/TARGET headers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="affable", allow_abbrev=False,
                                     description="Finite-depth Bratteli diagram and relation toolkit.")
    parser.add_argument("--seed", type=int, default=None, help="shuffle admissible choices with this seed")
    parser.add_argument("--cap", type=_nonneg, default=DEFAULT_ENUMERATION_CAP, help="path enumeration cap")
    parser.add_argument("--report", help="also write report lines to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, func: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, allow_abbrev=False)
        p.set_defaults(func=func)
        return p

    p = command("validate", cmd_validate, "validate a diagram, subdiagram or quotient file")
    p.add_argument("file")
    p.add_argument("--host")
    p.add_argument("--source")
    p.add_argument("--target")

    p = command("paths", cmd_paths, "count (and optionally list) paths to a level")
    p.add_argument("diagram")
    p.add_argument("--level", type=_nonneg, required=True)
    p.add_argument("--out", help="write the sorted path list here")

    p = command("telescope", cmd_telescope, "telescope along cut levels")
    p.add_argument("diagram")
    p.add_argument("--cuts", type=_ints, required=True)
    p.add_argument("--out", required=True)

    p = command("microscope", cmd_microscope, "split the edges of one level into a new level")
    p.add_argument("diagram")
    p.add_argument("--level", type=_nonneg, required=True)
    p.add_argument("--out", required=True)

    p = command("capacity", cmd_capacity, "recode until vertex counts and multiplicities meet bounds")
    p.add_argument("diagram")
    p.add_argument("--cap-a", type=_ints, required=True)
    p.add_argument("--cap-b", type=_ints, required=True)
    p.add_argument("--step-budget", type=_nonneg, default=DEFAULT_STEP_BUDGET)
    p.add_argument("--out", required=True)

    p = command("simple", cmd_simple, "report simplicity windows")
    p.add_argument("diagram")

    p = command("thin", cmd_thin, "certify the thinness bound of a subdiagram")
    p.add_argument("--sub", required=True)
    p.add_argument("--host")
    p.add_argument("--depth", "--level", dest="depth", type=_nonneg)
    p.add_argument("--eps", type=_rational, default=Fraction(1, 2**20))

    p = command("rel-join", cmd_rel_join, "join of two relations")
    p.add_argument("r")
    p.add_argument("s")
    p.add_argument("--out")

    p = command("rel-transversal", cmd_rel_transversal, "search for a transversality witness")
    p.add_argument("r")
    p.add_argument("s")

    p = command("rel-filtration", cmd_rel_filtration, "shrink a chain to members transverse to S")
    p.add_argument("chain")
    p.add_argument("s")
    p.add_argument("--out")

    p = command("rel-from-action", cmd_rel_from_action, "orbit relation of a free permutation action")
    p.add_argument("perms")
    p.add_argument("--out")

    p = command("build-diagram", cmd_build_diagram, "diagram of a chain of relations")
    p.add_argument("chain")
    p.add_argument("--out", required=True)

    p = command("transverse-build", cmd_transverse_build, "small and large diagrams with their quotient")
    p.add_argument("chain")
    p.add_argument("s")
    p.add_argument("--out-dir", required=True)

    p = command("plant", cmd_plant, "choose the spine and plant replicas")
    _absorption_flags(p)
    p.add_argument("--out", help="write the replica subdiagram here")

    p = command("absorb", cmd_absorb, "build the rewritten diagram and its quotient")
    _absorption_flags(p)
    p.add_argument("--out-dir")

    p = command("alpha", cmd_alpha, "check the shift map")
    _absorption_flags(p)
    p.add_argument("--depth", type=_nonneg)
    p.add_argument("--out")

    p = command("verify-star", cmd_verify_star, "check the generation identities at a cofinality level")
    _absorption_flags(p)
    p.add_argument("--n", "--level", dest="level", type=_nonneg, required=True)
    p.add_argument("--depth", type=_nonneg)
    p.add_argument("--omit", type=_ints, default=[], help="replica relations to leave out")
    p.add_argument("--with-k", action="store_true", help="include K on Y")
    p.add_argument("--brute", action="store_true", help="enumerate host paths instead")

    p = command("demo", cmd_demo, "end-to-end pipeline on a bundled instance")
    p.add_argument("instance", choices=["two-point"])
    p.add_argument("--depth", type=_nonneg, default=6)
    p.add_argument("--exhaustive-lift", type=_nonneg, default=0,
                   help="also check path lifting exhaustively up to this level")
    p.add_argument("--out-dir")

    p = command("dot", cmd_dot, "render a diagram (or a highlighted subdiagram) as DOT")
    p.add_argument("file")
    p.add_argument("--host")
    p.add_argument("--out")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output()
    try:
        args.func(args, out)
    except (UsageError, textio.ParseError, DiagramError, RelationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, AbsorptionError, EnumerationCapExceeded) as exc:
        out.stage(args.command, False, str(exc))
    if args.report:
        _write(args.report, "".join(line + "\n" for line in out.lines))
    return 0 if out.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
