"""Line-oriented text formats for diagrams, subdiagrams, quotients, relations and chains.

Diagram::

    V <level> <id>
    E <level> <id> <source-id> <range-id>

Subdiagram: ``S <level> <edge-id>``.  Quotient: ``STRICT full|source`` then
``QV <level> <src> <dst>`` and ``QE <level> <src> <dst>``.  Relation:
``P <id>`` points, ``C <id> ...`` classes, ``G <cycles>`` permutations.
Chains add ``CHAIN <k>`` section headers before their C lines.

Subdiagram and quotient files may name the files they refer to with
``HOST <path>``, ``SOURCE <path>`` and ``TARGET <path>`` lines.  ``#`` starts
a comment everywhere.
"""

from __future__ import annotations

import re
from pathlib import Path as FsPath
from typing import Iterator, Sequence

from affable.diagram import (
    STRICT_FULL,
    STRICT_SOURCE,
    BratteliDiagram,
    DiagramError,
    DiagramQuotient,
    Edge,
    Subdiagram,
)
from affable.relations import FiniteEqRel, Point, RelationError, format_cycles, permutation_from_cycles

HEADERS = ("HOST", "SOURCE", "TARGET")


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


def records(text: str) -> Iterator[tuple[int, list[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield number, body.split()


def _level(number: int, token: str) -> int:
    if not token.isdigit():
        raise ParseError(number, f"level {token!r} is not a nonnegative integer")
    return int(token)


def _arity(number: int, fields: list[str], count: int) -> None:
    if len(fields) != count:
        raise ParseError(number, f"{fields[0]} takes {count - 1} fields, got {len(fields) - 1}")


def read_headers(text: str) -> dict[str, str]:
    """HOST / SOURCE / TARGET references, relative paths kept as written."""
    found = {}
    for number, fields in records(text):
        if fields[0] in HEADERS:
            _arity(number, fields, 2)
            found[fields[0]] = fields[1]
    return found


def parse_diagram(text: str) -> BratteliDiagram:
    vertices: list[list[str]] = []
    edges: list[list[Edge]] = []
    known: list[set[str]] = []
    edge_ids: list[set[str]] = []
    last_edge_level = 0
    for number, fields in records(text):
        kind = fields[0]
        if kind == "V":
            _arity(number, fields, 3)
            n, vid = _level(number, fields[1]), fields[2]
            if not vertices and n != 0:
                raise ParseError(number, "the first vertex must be at level 0")
            if n < len(vertices) - 1:
                raise ParseError(number, f"vertex level {n} after level {len(vertices) - 1}")
            if n > len(vertices):
                raise ParseError(number, f"level gap: level {n} declared after level {len(vertices) - 1}")
            if n == len(vertices):
                vertices.append([])
                known.append(set())
                if n:
                    edges.append([])
                    edge_ids.append(set())
            if n == 0 and vertices[0]:
                raise ParseError(number, "level 0 must hold exactly one vertex")
            if vid in known[n]:
                raise ParseError(number, f"duplicate vertex {vid!r} at level {n}")
            vertices[n].append(vid)
            known[n].add(vid)
        elif kind == "E":
            _arity(number, fields, 5)
            n, eid, src, dst = _level(number, fields[1]), fields[2], fields[3], fields[4]
            if n < 1 or n >= len(vertices):
                raise ParseError(number, f"edge level {n} has no declared range level")
            if n < last_edge_level:
                raise ParseError(number, f"edge level {n} after level {last_edge_level}")
            if src not in known[n - 1]:
                raise ParseError(number, f"unknown source vertex {src!r} at level {n - 1}")
            if dst not in known[n]:
                raise ParseError(number, f"unknown range vertex {dst!r} at level {n}")
            if eid in edge_ids[n - 1]:
                raise ParseError(number, f"duplicate edge {eid!r} at level {n}")
            edges[n - 1].append(Edge(eid, src, dst))
            edge_ids[n - 1].add(eid)
            last_edge_level = n
        elif kind in HEADERS:
            continue
        else:
            raise ParseError(number, f"unknown record {kind!r}")
    if not vertices:
        raise ParseError(0, "no vertices declared")
    try:
        return BratteliDiagram(vertices, edges)
    except DiagramError as exc:
        raise ParseError(0, str(exc)) from None


def emit_diagram(d: BratteliDiagram) -> str:
    out = [f"V 0 {d.root}"]
    for n in range(1, d.depth + 1):
        out.extend(f"V {n} {v}" for v in d.vertices(n))
        out.extend(f"E {n} {e.id} {e.source} {e.range}" for e in d.edges(n))
    return "\n".join(out) + "\n"


def _header_lines(headers: dict[str, str] | None) -> list[str]:
    return [f"{k} {v}" for k, v in (headers or {}).items()]


def parse_subdiagram(text: str, host: BratteliDiagram) -> Subdiagram:
    levels: list[list[str]] = [[] for _ in range(host.depth)]
    for number, fields in records(text):
        if fields[0] in HEADERS:
            continue
        if fields[0] != "S":
            raise ParseError(number, f"unknown record {fields[0]!r}")
        _arity(number, fields, 3)
        n, eid = _level(number, fields[1]), fields[2]
        if not 1 <= n <= host.depth or not host.has_edge(n, eid):
            raise ParseError(number, f"host has no edge {eid!r} at level {n}")
        levels[n - 1].append(eid)
    return Subdiagram(host, levels)


def emit_subdiagram(s: Subdiagram, headers: dict[str, str] | None = None) -> str:
    out = _header_lines(headers)
    for n in range(1, s.depth + 1):
        out.extend(f"S {n} {e.id}" for e in s.edges(n))
    return "\n".join(out) + "\n"


def parse_quotient(text: str, source: BratteliDiagram, target: BratteliDiagram) -> DiagramQuotient:
    strictness = None
    vmaps: list[dict[str, str]] = [{} for _ in range(source.depth + 1)]
    emaps: list[dict[str, str]] = [{} for _ in range(source.depth + 1)]
    for number, fields in records(text):
        kind = fields[0]
        if kind in HEADERS:
            continue
        if kind == "STRICT":
            _arity(number, fields, 2)
            if fields[1] not in (STRICT_FULL, STRICT_SOURCE):
                raise ParseError(number, f"strictness must be {STRICT_FULL} or {STRICT_SOURCE}")
            strictness = fields[1]
        elif kind in ("QV", "QE"):
            _arity(number, fields, 4)
            n, a, b = _level(number, fields[1]), fields[2], fields[3]
            if n > source.depth:
                raise ParseError(number, f"level {n} beyond source depth {source.depth}")
            if kind == "QV":
                if not source.has_vertex(n, a) or n > target.depth or not target.has_vertex(n, b):
                    raise ParseError(number, f"unknown vertex in {a!r} -> {b!r} at level {n}")
                table = vmaps[n]
            else:
                if n < 1 or not source.has_edge(n, a) or n > target.depth or not target.has_edge(n, b):
                    raise ParseError(number, f"unknown edge in {a!r} -> {b!r} at level {n}")
                table = emaps[n]
            if a in table:
                raise ParseError(number, f"{a!r} mapped twice at level {n}")
            table[a] = b
        else:
            raise ParseError(number, f"unknown record {kind!r}")
    if strictness is None:
        raise ParseError(0, "missing STRICT header")
    vmaps[0].setdefault(source.root, target.root)
    return DiagramQuotient(source, target, tuple(vmaps), tuple(emaps), strictness)


def emit_quotient(q: DiagramQuotient, headers: dict[str, str] | None = None) -> str:
    out = _header_lines(headers) + [f"STRICT {q.strictness}"]
    for n in range(q.source.depth + 1):
        out.extend(f"QV {n} {v} {q.vertex_maps[n][v]}" for v in q.source.vertices(n) if v in q.vertex_maps[n])
        if n:
            out.extend(f"QE {n} {e.id} {q.edge_maps[n][e.id]}" for e in q.source.edges(n) if e.id in q.edge_maps[n])
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- relations

_CYCLE = re.compile(r"\(([^()]*)\)")


def _point(token: str) -> Point:
    return int(token) if re.fullmatch(r"-?\d+", token) else token


def _parse_points(text: str) -> list[Point]:
    points: list[Point] = []
    seen = set()
    for number, fields in records(text):
        if fields[0] == "P":
            for token in fields[1:]:
                x = _point(token)
                if x in seen:
                    raise ParseError(number, f"duplicate point {token!r}")
                seen.add(x)
                points.append(x)
    return points


def _parse_class(number: int, fields: list[str], points: set) -> list[Point]:
    members = [_point(t) for t in fields[1:]]
    for x in members:
        if x not in points:
            raise ParseError(number, f"class member {x!r} is not a declared point")
    return members


def parse_relation(text: str) -> FiniteEqRel:
    points = _parse_points(text)
    known = set(points)
    classes = []
    for number, fields in records(text):
        if fields[0] == "C":
            classes.append(_parse_class(number, fields, known))
        elif fields[0] not in ("P", "G"):
            raise ParseError(number, f"unknown record {fields[0]!r}")
    try:
        return FiniteEqRel(points, classes)
    except RelationError as exc:
        raise ParseError(0, str(exc)) from None


def emit_relation(r: FiniteEqRel) -> str:
    out = ["P " + " ".join(map(str, r.points))]
    out.extend("C " + " ".join(map(str, c)) for c in r.classes if len(c) > 1)
    return "\n".join(out) + "\n"


def parse_permutations(text: str) -> tuple[list[Point], list[dict[Point, Point]]]:
    points = _parse_points(text)
    generators = []
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body.startswith("G"):
            continue
        rest = body[1:].strip()
        if _CYCLE.sub("", rest).strip():
            raise ParseError(number, f"malformed cycle notation {rest!r}")
        cycles = [[_point(t) for t in m.split()] for m in _CYCLE.findall(rest)]
        try:
            generators.append(permutation_from_cycles(points, [c for c in cycles if c]))
        except RelationError as exc:
            raise ParseError(number, str(exc)) from None
    return points, generators


def emit_permutations(points: Sequence[Point], generators: Sequence[dict]) -> str:
    out = ["P " + " ".join(map(str, points))]
    out.extend(f"G {format_cycles(g)}" for g in generators)
    return "\n".join(out) + "\n"


def parse_chain(text: str) -> list[FiniteEqRel]:
    """Relations R_0, R_1, ... from CHAIN sections; sections must be numbered 0, 1, 2, ..."""
    points = _parse_points(text)
    known = set(points)
    sections: list[list[list[Point]]] = []
    for number, fields in records(text):
        kind = fields[0]
        if kind == "CHAIN":
            _arity(number, fields, 2)
            if _level(number, fields[1]) != len(sections):
                raise ParseError(number, f"expected CHAIN {len(sections)}")
            sections.append([])
        elif kind == "C":
            if not sections:
                raise ParseError(number, "class before the first CHAIN header")
            sections[-1].append(_parse_class(number, fields, known))
        elif kind != "P":
            raise ParseError(number, f"unknown record {kind!r}")
    if not sections:
        raise ParseError(0, "no CHAIN sections")
    try:
        return [FiniteEqRel(points, classes) for classes in sections]
    except RelationError as exc:
        raise ParseError(0, str(exc)) from None


def emit_chain(chain: Sequence[FiniteEqRel]) -> str:
    out = ["P " + " ".join(map(str, chain[0].points))]
    for k, r in enumerate(chain):
        out.append(f"CHAIN {k}")
        out.extend("C " + " ".join(map(str, c)) for c in r.classes if len(c) > 1)
    return "\n".join(out) + "\n"


def read_text(path: str | FsPath) -> str:
    return FsPath(path).read_text(encoding="utf-8")


def resolve(reference: str, relative_to: str | FsPath) -> FsPath:
    """A header path is taken relative to the file that names it."""
    ref = FsPath(reference)
    return ref if ref.is_absolute() else FsPath(relative_to).parent / ref
