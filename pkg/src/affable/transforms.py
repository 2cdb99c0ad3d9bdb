"""Rewriting diagrams without changing their path spaces.

Telescoping keeps a subset of the levels and replaces the edges between two
kept levels by the finite paths joining them.  Microscoping does the
reverse at one level: it inserts a new level holding one vertex per edge.
Both come with a `RecodingMap`, the induced bijection on root paths.

`ensure_capacity` combines the two to reach prescribed lower bounds on
vertex counts and edge multiplicities, `simplicity_window` certifies the
truncated form of simplicity, and `thinness_bound` gives the exact upper
bound on the invariant measure carried by a subdiagram at a given level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from affable.diagram import (
    BratteliDiagram,
    DiagramError,
    Edge,
    Path,
    Subdiagram,
    ValidationReport,
    incidence_matrix,
    iter_segments,
    matmul,
    path_count_matrix,
)

DEFAULT_STEP_BUDGET = 16
JOIN = "."


class CapacityError(RuntimeError):
    """ensure_capacity cannot realise the request on the given diagram."""


@dataclass(frozen=True)
class _Telescoping:
    cuts: tuple[int, ...]
    blocks: tuple[dict[str, tuple[str, ...]], ...]  # per new level: new edge id -> old ids

    def level_map(self) -> dict[int, int]:
        return {c: k for k, c in enumerate(self.cuts)}

    def forward(self, path: Path) -> Path:
        k = self.cuts.index(len(path))
        out = []
        for j in range(1, k + 1):
            piece = path[self.cuts[j - 1]: self.cuts[j]]
            out.append(piece[0] if len(piece) == 1 else JOIN.join(piece))
        return tuple(out)

    def inverse(self, path: Path) -> Path:
        out: list[str] = []
        for j, eid in enumerate(path, start=1):
            out.extend(self.blocks[j][eid])
        return tuple(out)


@dataclass(frozen=True)
class _Microscoping:
    level: int

    def level_map(self, depth: int) -> dict[int, int]:
        return {m: (m if m < self.level else m + 1) for m in range(depth + 1)}

    def forward(self, path: Path) -> Path:
        if len(path) < self.level:
            return path
        n = self.level
        return path[:n] + path[n - 1:]

    def inverse(self, path: Path) -> Path:
        n = self.level
        if len(path) < n:
            return path
        if len(path) == n or path[n - 1] != path[n]:
            raise DiagramError(f"path {path} does not cross the inserted level {n} consistently")
        return path[:n] + path[n + 1:]


@dataclass(frozen=True)
class RecodingMap:
    """Bijection between root paths of `source` and `target`.

    `level_map` sends a source level to the target level it became; paths
    whose length is a key of it can be pushed forward.
    """

    source: BratteliDiagram
    target: BratteliDiagram
    steps: tuple = ()
    level_map: dict[int, int] = field(default_factory=dict)

    @classmethod
    def identity(cls, d: BratteliDiagram) -> "RecodingMap":
        return cls(d, d, (), {m: m for m in range(d.depth + 1)})

    def forward(self, path: Sequence[str]) -> Path:
        path = tuple(path)
        if len(path) not in self.level_map:
            raise DiagramError(f"length {len(path)} is not a level kept by this recoding")
        for step in self.steps:
            path = step.forward(path)
        return path

    def inverse(self, path: Sequence[str]) -> Path:
        path = tuple(path)
        if len(path) not in self.level_map.values():
            raise DiagramError(f"length {len(path)} is not the image of a source level")
        for step in reversed(self.steps):
            path = step.inverse(path)
        return path

    def then(self, other: "RecodingMap") -> "RecodingMap":
        """This recoding followed by `other`."""
        if other.source is not self.target and other.source != self.target:
            raise DiagramError("recodings do not chain")
        levels = {m: other.level_map[k] for m, k in self.level_map.items() if k in other.level_map}
        return RecodingMap(self.source, other.target, self.steps + other.steps, levels)

    @property
    def num_steps(self) -> int:
        return len(self.steps)


def telescope(d: BratteliDiagram, cuts: Sequence[int]) -> tuple[BratteliDiagram, RecodingMap]:
    cuts = tuple(cuts)
    if not cuts or cuts[0] != 0 or cuts[-1] != d.depth:
        raise DiagramError(f"cuts must start at 0 and end at {d.depth}: {list(cuts)}")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise DiagramError(f"cuts must be strictly increasing: {list(cuts)}")
    vertices = [d.vertices(c) for c in cuts]
    edges: list[list[Edge]] = []
    blocks: list[dict[str, tuple[str, ...]]] = [{}]
    for lo, hi in zip(cuts, cuts[1:]):
        level: list[Edge] = []
        block: dict[str, tuple[str, ...]] = {}
        if hi - lo == 1:
            level = list(d.edges(hi))
            block = {e.id: (e.id,) for e in level}
        else:
            for first in d.edges(lo + 1):
                for rest in iter_segments(d, lo + 1, hi, first.range):
                    ids = (first.id,) + tuple(e.id for e in rest)
                    new_id = JOIN.join(ids)
                    end = rest[-1].range
                    level.append(Edge(new_id, first.source, end))
                    block[new_id] = ids
        edges.append(level)
        blocks.append(block)
    out = BratteliDiagram(vertices, edges)
    step = _Telescoping(cuts, tuple(blocks))
    return out, RecodingMap(d, out, (step,), step.level_map())


def microscope(d: BratteliDiagram, n: int) -> tuple[BratteliDiagram, RecodingMap]:
    if not 1 <= n <= d.depth:
        raise DiagramError(f"microscope level {n} outside 1..{d.depth}")
    split = d.edges(n)
    vertices = list(d.vertex_levels())
    vertices.insert(n, [e.id for e in split])
    edges = list(d.edge_levels())
    edges[n - 1: n] = [
        [Edge(e.id, e.source, e.id) for e in split],
        [Edge(e.id, e.id, e.range) for e in split],
    ]
    out = BratteliDiagram(vertices, edges)
    step = _Microscoping(n)
    return out, RecodingMap(d, out, (step,), step.level_map(d.depth))


@dataclass(frozen=True)
class SimplicityWindows:
    """Per-level windows: windows[n] is the least m > n with V_n fully joined to V_m."""

    windows: dict[int, int]
    failures: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return not self.failures


def simplicity_window(d: BratteliDiagram) -> SimplicityWindows:
    windows: dict[int, int] = {}
    failures = []
    for n in range(d.depth):
        reach = {v: {v} for v in d.vertices(n)}
        found = None
        for m in range(n + 1, d.depth + 1):
            reach = {v: {e.range for u in rs for e in d.out_edges(m - 1, u)} for v, rs in reach.items()}
            full = len(d.vertices(m))
            if all(len(rs) == full for rs in reach.values()):
                found = m
                break
        if found is None:
            failures.append(n)
        else:
            windows[n] = found
    return SimplicityWindows(windows, tuple(failures))


@dataclass(frozen=True)
class CapacityRequest:
    a: tuple[int, ...]
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        if len(self.a) != len(self.b):
            raise ValueError(f"capacity sequences differ in length: {len(self.a)} vs {len(self.b)}")
        if any(x < 1 for x in self.a + self.b):
            raise ValueError("capacity entries must be at least 1")

    @property
    def depth(self) -> int:
        return len(self.a)


def min_multiplicity(d: BratteliDiagram, n: int) -> int:
    return min(min(row) for row in incidence_matrix(d, n))


def check_capacity(d: BratteliDiagram, req: CapacityRequest) -> ValidationReport:
    """Report every level n <= req.depth where #V_n < a_n or some multiplicity < b_n."""
    report = ValidationReport()
    if d.depth < req.depth:
        report.add("depth", f"diagram depth {d.depth} below requested depth {req.depth}")
        return report
    for n in range(1, req.depth + 1):
        size = len(d.vertices(n))
        if size < req.a[n - 1]:
            report.add("vertex-count", f"#V = {size} < {req.a[n - 1]}", n)
        mult = min_multiplicity(d, n)
        if mult < req.b[n - 1]:
            report.add("multiplicity", f"min multiplicity {mult} < {req.b[n - 1]}", n)
    return report


@dataclass(frozen=True)
class _Station:
    """An output level: V_end itself (start is None) or the paths from V_start to V_end."""

    end: int
    start: int | None = None


def _plan_stations(d: BratteliDiagram, req: CapacityRequest) -> list[_Station]:
    cache: dict[tuple[int, int], list[list[int]]] = {}

    def counts(m: int, n: int) -> list[list[int]]:
        if (m, n) not in cache:
            cache[(m, n)] = (path_count_matrix(d, m, m) if m == n
                             else matmul(counts(m, n - 1), incidence_matrix(d, n)))
        return cache[(m, n)]

    def least(m: int, n: int) -> int:
        return min(min(row) for row in counts(m, n))

    stations: list[_Station] = []
    end = 0
    for k in range(req.depth):
        a, b = req.a[k], req.b[k]
        chosen = None
        for q in range(end + 1, d.depth + 1):
            if len(d.vertices(q)) >= a and least(end, q) >= b:
                chosen = _Station(q)
                break
            for p in range(end + 1, q):
                if least(end, p) >= b and sum(map(sum, counts(p, q))) >= a:
                    chosen = _Station(q, p)
                    break
            if chosen:
                break
        if chosen is None:
            raise CapacityError(
                f"depth too shallow: output level {k + 1} cannot reach a={a}, b={b} "
                f"below input level {end} of {d.depth}")
        stations.append(chosen)
        end = chosen.end
    return stations


def ensure_capacity(d: BratteliDiagram, req: CapacityRequest,
                    step_budget: int = DEFAULT_STEP_BUDGET) -> tuple[BratteliDiagram, RecodingMap]:
    """Telescope and microscope `d` until levels 1..req.depth meet the request.

    Each output level is either an input level V_q or, when more vertices are
    needed, the set of paths between two input levels p < q, obtained by
    telescoping p..q into one level and microscoping it.  Input levels below
    the last output level are kept as they are, so the output is usually
    deeper than the request; truncate it when only the requested levels matter.
    """
    windows = simplicity_window(d)
    if not windows.ok:
        raise CapacityError(f"not simple: no simplicity window at levels {list(windows.failures)}")
    if check_capacity(d, req).ok:
        return d, RecodingMap.identity(d)
    stations = _plan_stations(d, req)
    splits = [s for s in stations if s.start is not None]

    last = stations[-1].end
    cut_set = set(range(last, d.depth + 1)) | {0}
    for s in stations:
        cut_set.add(s.end)
        if s.start is not None:
            cut_set.add(s.start)
    cuts = sorted(cut_set)
    tail = range(last + 1, d.depth + 1) if stations[-1].start is None else range(last, d.depth + 1)

    planned = (cuts != list(range(d.depth + 1))) + len(splits) + 1
    if planned > step_budget:
        raise CapacityError(f"step budget exhausted: plan needs {planned} steps, budget {step_budget}")

    current, recoding = d, RecodingMap.identity(d)
    if cuts != list(range(d.depth + 1)):
        current, step = telescope(current, cuts)
        recoding = recoding.then(step)
    for s in sorted(splits, key=lambda s: s.end, reverse=True):
        current, step = microscope(current, cuts.index(s.end))
        recoding = recoding.then(step)

    def position(level: int) -> int:
        return cuts.index(level) + sum(1 for s in splits if s.end <= level)

    keep = [0]
    for s in stations:
        if s.start is None:
            keep.append(position(s.end))
        else:
            keep.append(cuts.index(s.end) + sum(1 for t in splits if t.end < s.end))
    keep.extend(position(level) for level in tail)
    if keep != list(range(current.depth + 1)):
        current, step = telescope(current, keep)
        recoding = recoding.then(step)
    if recoding.num_steps > step_budget:
        raise CapacityError(f"step budget exhausted: used {recoding.num_steps} of {step_budget}")
    check = check_capacity(current, req)
    if not check.ok:
        raise CapacityError(f"internal: planned output misses the request: {check.summary()}")
    return current, recoding


def thinness_bound(s: Subdiagram, n: int) -> Fraction:
    """max over subdiagram vertices w of level n of (#F-paths to w) / (#E-paths to w)."""
    if not 0 <= n <= s.depth:
        raise DiagramError(f"level {n} outside 0..{s.depth}")
    sub = s.count_paths(n)
    host = {s.host.root: 1}
    for k in range(1, n + 1):
        nxt = {v: 0 for v in s.host.vertices(k)}
        for e in s.host.edges(k):
            nxt[e.range] += host[e.source]
        host = nxt
    if not sub:
        return Fraction(0)
    return max(Fraction(c, host[w]) for w, c in sub.items())
