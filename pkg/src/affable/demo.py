"""The end-to-end two-point run: relations, templates, host, replicas, rewrite, checks."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from affable.absorption import (
    AbsorptionError,
    AbsorptionResult,
    AbsorptionScaffold,
    Templates,
    build_absorption_diagram,
    capacity_request_for,
    check_capacity_conditions,
    embed_template,
    exhaustive_lift_check,
    plant_replicas,
    shift_map_alpha,
    verify_star,
)
from affable.afstructure import check_transverse_build, transverse_diagrams
from affable.diagram import DEFAULT_ENUMERATION_CAP, BratteliDiagram, count_paths, diagrams_isomorphic, relabel, truncate
from affable.fixtures import complete_stationary, loop_then_chain, two_branch_tree
from affable.relations import FiniteEqRel, find_transversal
from affable.transforms import CapacityError, CapacityRequest, check_capacity, ensure_capacity, thinness_bound

BASE_WIDTH = 2


@dataclass
class Stage:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class DemoRun:
    depth: int
    stages: list[Stage] = field(default_factory=list)
    values: dict[str, object] = field(default_factory=dict)
    margins: list[tuple[int, int]] = field(default_factory=list)
    host: BratteliDiagram | None = None
    templates: Templates | None = None
    scaffold: AbsorptionScaffold | None = None
    result: AbsorptionResult | None = None

    @property
    def ok(self) -> bool:
        return bool(self.stages) and all(s.passed for s in self.stages)

    def stage(self, name: str) -> Stage:
        return next(s for s in self.stages if s.name == name)


def demo_host(templates: Templates, depth: int, base_depth: int | None = None) -> BratteliDiagram:
    """A simple host of exactly `depth` levels meeting the capacity request of the templates."""
    a, b = capacity_request_for(templates, depth)
    request = CapacityRequest(a, b)
    base_depth = base_depth or max(40, 8 * depth)
    out, _ = ensure_capacity(complete_stationary(base_depth, BASE_WIDTH), request)
    return relabel(truncate(out, depth))


def two_point_templates(depth: int) -> tuple[Templates, list[Stage]]:
    points = (1, 2)
    chain = [FiniteEqRel.identity(points)] * (depth + 1)
    s = FiniteEqRel.full(points)
    stages = []
    witness = find_transversal(chain[-1], s)
    stages.append(Stage("transverse", True, f"h has {len(witness.rewrite)} triples"))
    tb = transverse_diagrams(points, chain, s)
    report = check_transverse_build(tb)
    shapes = diagrams_isomorphic(tb.d, two_branch_tree(depth)) and diagrams_isomorphic(tb.d_prime, loop_then_chain(depth))
    stages.append(Stage("templates", report.ok and shapes,
                        f"W has {tb.d.num_vertices()} vertices, W' has {tb.d_prime.num_vertices()}; "
                        + ("shapes match" if shapes else "unexpected shapes") + f"; {report.summary()}"))
    return Templates(tb.quotient), stages


def two_point_demo(depth: int = 6, seed: int | None = None, cap: int = DEFAULT_ENUMERATION_CAP,
                   exhaustive_lift_depth: int = 0) -> DemoRun:
    """Run every stage for X = {1, 2}, R = Δ, S = X×X; stop at the first stage that cannot continue."""
    run = DemoRun(depth)
    if depth < 4:
        run.stages.append(Stage("depth", False, f"depth {depth} < 4"))
        return run
    started = time.perf_counter()
    templates, stages = two_point_templates(depth)
    run.stages.extend(stages)
    run.templates = templates
    if not run.ok:
        return run
    try:
        host = demo_host(templates, depth)
    except CapacityError as exc:
        run.stages.append(Stage("host", False, str(exc)))
        return run
    run.host = host
    a, b = capacity_request_for(templates, depth)
    cap_report = check_capacity(host, CapacityRequest(a, b))
    run.stages.append(Stage("host", cap_report.ok,
                            f"{host.num_vertices()} vertices, {host.num_edges()} edges; {cap_report.summary()}"))
    run.values["host-paths"] = count_paths(host, depth).total()
    y_sub, _ = embed_template(host, templates.w, depth, seed=seed)
    conditions = check_capacity_conditions(host, y_sub, templates)
    run.stages.append(Stage("capacity", conditions.ok, conditions.summary()))
    if not run.ok:
        return run
    try:
        scaffold = plant_replicas(host, y_sub, templates, seed=seed)
    except AbsorptionError as exc:
        run.stages.append(Stage("plant", False, str(exc)))
        return run
    run.scaffold = scaffold
    run.stages.append(Stage("plant", True, f"spine {'.'.join(scaffold.spine)}; {len(scaffold.replicas)} replicas"))
    for name, value in scaffold.thinness.items():
        run.values[f"thinness-{name}"] = value
    shallow = max(2, depth - 2)
    earlier = {"L": thinness_bound(scaffold.l_sub, shallow), "L'": thinness_bound(scaffold.l_prime_sub, shallow)}
    monotone = all(scaffold.thinness[k] <= earlier[k] for k in earlier)
    run.stages.append(Stage("thinness", monotone,
                            ", ".join(f"{k}: {scaffold.thinness[k]} at {depth} vs {earlier[k]} at {shallow}"
                                      for k in earlier)))
    try:
        result = build_absorption_diagram(scaffold, cap=cap)
    except AbsorptionError as exc:
        run.stages.append(Stage("absorb", False, str(exc)))
        return run
    run.result = result
    run.stages.append(Stage("absorb", True, f"{result.rewritten.num_vertices()} vertices, "
                                            f"{result.rewritten.num_edges()} edges"))
    for n in range(1, exhaustive_lift_depth + 1):
        ok = exhaustive_lift_check(result.quotient, n)
        run.stages.append(Stage(f"lift-{n}", ok, f"{count_paths(host, n).total()} paths"))
    alpha = shift_map_alpha(result)
    run.stages.append(Stage("alpha", alpha.ok, f"{len(alpha.forward)} paths; {alpha.report.summary()}"))
    margin = -1
    failures = []
    for n in range(depth):
        star = verify_star(result, n)
        star_k = verify_star(result, n, with_k=True)
        if not (star.sound and star_k.sound):
            failures.append(f"unsound at n={n}")
        if star.complete and star_k.complete and margin == n - 1:
            margin = n
    run.margins.append((margin, depth))
    run.values["margin"] = margin
    run.stages.append(Stage("star", not failures and margin == depth - 1,
                            "; ".join(failures) or f"complete for n = 0..{margin}"))
    control = verify_star(result, depth - 1, omit=(1,))
    detail = "without K_1 nothing is missed"
    if control.unreached:
        first, second = control.unreached[0]
        detail = f"without K_1 unreached: {'.'.join(first)} vs {'.'.join(second)}"
    run.stages.append(Stage("control", not control.complete, detail))
    run.values["seconds"] = Fraction(round((time.perf_counter() - started) * 1000), 1000)
    return run
