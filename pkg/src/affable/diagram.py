"""Bratteli diagrams truncated at a finite depth.

A diagram of depth N has vertex levels V_0..V_N and edge levels E_1..E_N.
Every edge at level n runs from a vertex of V_{n-1} (its source) to a
vertex of V_n (its range).  Ids are opaque strings, unique within a level;
the same id may reappear on another level.

A finite path of length n is a tuple of edge ids (e_1, ..., e_n) with
e_k in E_k and range(e_k) == source(e_{k+1}).  All counting is done with
Python integers, so no precision is ever lost.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import networkx as nx

DEFAULT_ENUMERATION_CAP = 1_000_000

Path = tuple[str, ...]


class DiagramError(ValueError):
    """Raised when a diagram, subdiagram or quotient cannot be constructed."""


class EnumerationCapExceeded(RuntimeError):
    """Raised when an exhaustive enumeration would exceed the configured cap."""

    def __init__(self, total: int, cap: int):
        super().__init__(f"{total} paths exceed the enumeration cap {cap}")
        self.total = total
        self.cap = cap


@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    range: str


@dataclass(frozen=True)
class Issue:
    code: str
    detail: str
    level: int | None = None
    item: str | None = None
    severity: str = "error"

    def __str__(self) -> str:
        where = "" if self.level is None else f" level {self.level}"
        what = "" if self.item is None else f" {self.item}"
        return f"{self.severity}: {self.code}{where}{what}: {self.detail}"


@dataclass
class ValidationReport:
    """Collected findings of a validator; `ok` ignores informational entries."""

    issues: list[Issue] = field(default_factory=list)

    def add(self, code: str, detail: str, level: int | None = None,
            item: str | None = None, severity: str = "error") -> None:
        self.issues.append(Issue(code, detail, level, item, severity))

    def extend(self, other: "ValidationReport") -> None:
        self.issues.extend(other.issues)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def codes(self) -> set[str]:
        return {i.code for i in self.errors}

    def summary(self) -> str:
        if self.ok:
            return "ok"
        first = self.errors[0]
        more = len(self.errors) - 1
        return str(first) + (f" (+{more} more)" if more else "")


class BratteliDiagram:
    """A standard Bratteli diagram truncated at depth N.

    `vertices[n]` lists the ids of V_n in order.  `edges[k]` lists the edges
    of level k+1, so `edges` has length N.  Construction checks that ids are
    unique per level and that every edge endpoint exists; the structural
    invariants (single root, nonempty fibers) are left to `validate_diagram`
    so that broken inputs can still be inspected.
    """

    def __init__(self, vertices: Sequence[Sequence[str]], edges: Sequence[Sequence[Edge]]):
        if not vertices:
            raise DiagramError("a diagram needs at least level 0")
        if len(edges) != len(vertices) - 1:
            raise DiagramError(
                f"{len(vertices)} vertex levels need {len(vertices) - 1} edge levels, got {len(edges)}")
        self._vertices: tuple[tuple[str, ...], ...] = tuple(tuple(level) for level in vertices)
        self._edges: tuple[tuple[Edge, ...], ...] = ((),) + tuple(tuple(level) for level in edges)
        self._vindex: list[dict[str, int]] = []
        for n, level in enumerate(self._vertices):
            index: dict[str, int] = {}
            for v in level:
                if v in index:
                    raise DiagramError(f"duplicate vertex id {v!r} at level {n}")
                index[v] = len(index)
            self._vindex.append(index)
        self._eindex: list[dict[str, Edge]] = [{}]
        self._out: list[dict[str, list[Edge]]] = [{v: [] for v in level} for level in self._vertices]
        self._in: list[dict[str, list[Edge]]] = [{v: [] for v in level} for level in self._vertices]
        for n in range(1, len(self._vertices)):
            index_e: dict[str, Edge] = {}
            for e in self._edges[n]:
                if e.id in index_e:
                    raise DiagramError(f"duplicate edge id {e.id!r} at level {n}")
                if e.source not in self._vindex[n - 1]:
                    raise DiagramError(f"edge {e.id!r} at level {n}: unknown source {e.source!r}")
                if e.range not in self._vindex[n]:
                    raise DiagramError(f"edge {e.id!r} at level {n}: unknown range {e.range!r}")
                index_e[e.id] = e
                self._out[n - 1][e.source].append(e)
                self._in[n][e.range].append(e)
            self._eindex.append(index_e)

    @property
    def depth(self) -> int:
        return len(self._vertices) - 1

    def vertices(self, n: int) -> tuple[str, ...]:
        self._check_level(n, 0)
        return self._vertices[n]

    def edges(self, n: int) -> tuple[Edge, ...]:
        self._check_level(n, 1)
        return self._edges[n]

    def edge(self, n: int, edge_id: str) -> Edge:
        self._check_level(n, 1)
        try:
            return self._eindex[n][edge_id]
        except KeyError:
            raise DiagramError(f"no edge {edge_id!r} at level {n}") from None

    def has_vertex(self, n: int, v: str) -> bool:
        return 0 <= n <= self.depth and v in self._vindex[n]

    def has_edge(self, n: int, edge_id: str) -> bool:
        return 1 <= n <= self.depth and edge_id in self._eindex[n]

    def vertex_position(self, n: int, v: str) -> int:
        return self._vindex[n][v]

    def out_edges(self, n: int, v: str) -> list[Edge]:
        """Edges of level n+1 whose source is v in V_n."""
        if n >= self.depth:
            return []
        return self._out[n][v]

    def in_edges(self, n: int, v: str) -> list[Edge]:
        """Edges of level n whose range is v in V_n."""
        if n == 0:
            return []
        return self._in[n][v]

    @property
    def root(self) -> str:
        return self._vertices[0][0]

    def vertex_levels(self) -> tuple[tuple[str, ...], ...]:
        return self._vertices

    def edge_levels(self) -> tuple[tuple[Edge, ...], ...]:
        return self._edges[1:]

    def num_vertices(self) -> int:
        return sum(len(level) for level in self._vertices)

    def num_edges(self) -> int:
        return sum(len(level) for level in self._edges)

    def path_range(self, path: Sequence[str]) -> str:
        """Terminal vertex of a path starting at the root."""
        if not path:
            return self.root
        return self.edge(len(path), path[-1]).range

    def is_path(self, path: Sequence[str]) -> bool:
        current = self.root
        for k, eid in enumerate(path, start=1):
            if not self.has_edge(k, eid):
                return False
            e = self._eindex[k][eid]
            if e.source != current:
                return False
            current = e.range
        return True

    def _check_level(self, n: int, low: int) -> None:
        if not low <= n <= self.depth:
            raise DiagramError(f"level {n} outside {low}..{self.depth}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BratteliDiagram):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._vertices, self._edges))

    def __repr__(self) -> str:
        sizes = "/".join(str(len(v)) for v in self._vertices)
        return f"BratteliDiagram(depth={self.depth}, vertices={sizes}, edges={self.num_edges()})"


def validate_diagram(d: BratteliDiagram) -> ValidationReport:
    report = ValidationReport()
    if len(d.vertices(0)) != 1:
        report.add("root", f"level 0 has {len(d.vertices(0))} vertices, expected exactly one", 0)
    for n in range(d.depth):
        for v in d.vertices(n):
            if not d.out_edges(n, v):
                report.add("no-out-edge", "vertex has no outgoing edge", n, v)
    for n in range(1, d.depth + 1):
        for v in d.vertices(n):
            if not d.in_edges(n, v):
                report.add("no-in-edge", "vertex has no incoming edge", n, v)
    return report


def incidence_matrix(d: BratteliDiagram, n: int) -> list[list[int]]:
    """Entry [a][b] counts edges of level n from V_{n-1}[a] to V_n[b]."""
    if not 1 <= n <= d.depth:
        raise DiagramError(f"incidence level {n} outside 1..{d.depth}")
    rows = [[0] * len(d.vertices(n)) for _ in d.vertices(n - 1)]
    for e in d.edges(n):
        rows[d.vertex_position(n - 1, e.source)][d.vertex_position(n, e.range)] += 1
    return rows


def matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    if not a:
        return []
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [0] * cols
        for k, x in enumerate(row):
            if x:
                brow = b[k]
                for j in range(cols):
                    acc[j] += x * brow[j]
        out.append(acc)
    return out


def identity_matrix(size: int) -> list[list[int]]:
    return [[int(i == j) for j in range(size)] for i in range(size)]


def path_count_matrix(d: BratteliDiagram, m: int, n: int) -> list[list[int]]:
    """Number of paths from each vertex of V_m to each vertex of V_n (m <= n)."""
    if not 0 <= m <= n <= d.depth:
        raise DiagramError(f"invalid level interval {m}..{n}")
    result = identity_matrix(len(d.vertices(m)))
    for k in range(m + 1, n + 1):
        result = matmul(result, incidence_matrix(d, k))
    return result


@dataclass(frozen=True)
class PathCountVector:
    level: int
    counts: dict[str, int]

    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, v: str) -> int:
        return self.counts[v]


def count_paths(d: BratteliDiagram, n: int) -> PathCountVector:
    if not 0 <= n <= d.depth:
        raise DiagramError(f"level {n} outside 0..{d.depth}")
    counts = {v: 1 for v in d.vertices(0)}
    for k in range(1, n + 1):
        nxt = {v: 0 for v in d.vertices(k)}
        for e in d.edges(k):
            nxt[e.range] += counts[e.source]
        counts = nxt
    return PathCountVector(n, counts)


def all_path_counts(d: BratteliDiagram) -> list[dict[str, int]]:
    """count_paths for every level, computed in one sweep."""
    levels = [{v: 1 for v in d.vertices(0)}]
    for k in range(1, d.depth + 1):
        nxt = {v: 0 for v in d.vertices(k)}
        for e in d.edges(k):
            nxt[e.range] += levels[-1][e.source]
        levels.append(nxt)
    return levels


def enumerate_paths(d: BratteliDiagram, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> list[Path]:
    """All root paths of length n, sorted lexicographically by edge ids."""
    total = count_paths(d, n).total()
    if total > cap:
        raise EnumerationCapExceeded(total, cap)
    frontier: list[tuple[Path, str]] = [((), d.root)]
    for k in range(n):
        frontier = [(p + (e.id,), e.range) for p, v in frontier for e in d.out_edges(k, v)]
    return sorted(p for p, _ in frontier)


def iter_segments(d: BratteliDiagram, m: int, n: int, start: str) -> Iterator[tuple[Edge, ...]]:
    """Edge sequences from vertex `start` in V_m down to level n."""
    if m == n:
        yield ()
        return
    for e in d.out_edges(m, start):
        for rest in iter_segments(d, m + 1, n, e.range):
            yield (e,) + rest


def truncate(d: BratteliDiagram, n: int) -> BratteliDiagram:
    """The diagram made of levels 0..n."""
    if not 0 <= n <= d.depth:
        raise DiagramError(f"cannot truncate depth {d.depth} diagram at {n}")
    return BratteliDiagram(d.vertex_levels()[: n + 1], d.edge_levels()[:n])


def relabel(d: BratteliDiagram) -> BratteliDiagram:
    """Short positional ids: vertex i of level n becomes v{n}_{i}, edge i of E_n becomes e{n}_{i}."""
    names = [{d.root: d.root}] + [{v: f"v{n}_{i}" for i, v in enumerate(d.vertices(n))}
                                  for n in range(1, d.depth + 1)]
    vertices = [[names[n][v] for v in d.vertices(n)] for n in range(d.depth + 1)]
    edges = [[Edge(f"e{n}_{i}", names[n - 1][e.source], names[n][e.range]) for i, e in enumerate(d.edges(n))]
             for n in range(1, d.depth + 1)]
    return BratteliDiagram(vertices, edges)


def to_graph(d: BratteliDiagram) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    for n, level in enumerate(d.vertex_levels()):
        for v in level:
            g.add_node((n, v), level=n)
    for n in range(1, d.depth + 1):
        for e in d.edges(n):
            g.add_edge((n - 1, e.source), (n, e.range), key=e.id)
    return g


def diagrams_isomorphic(a: BratteliDiagram, b: BratteliDiagram) -> bool:
    """Level-preserving isomorphism of the underlying multigraphs."""
    if a.depth != b.depth:
        return False
    for n in range(a.depth + 1):
        if len(a.vertices(n)) != len(b.vertices(n)):
            return False
        if n and len(a.edges(n)) != len(b.edges(n)):
            return False
    return nx.is_isomorphic(to_graph(a), to_graph(b),
                            node_match=lambda x, y: x["level"] == y["level"])


def graded_isomorphism(a: BratteliDiagram, b: BratteliDiagram) -> tuple[list[dict[str, str]], list[dict[str, str]]] | None:
    """A level-preserving isomorphism a -> b as (vertex maps, edge maps), or None.

    Parallel edges between matched vertices are paired in declaration order.
    Index 0 of the edge maps is an unused empty dict so that index n is E_n.
    """
    if a.depth != b.depth:
        return None
    matcher = nx.algorithms.isomorphism.MultiDiGraphMatcher(
        to_graph(a), to_graph(b), node_match=lambda x, y: x["level"] == y["level"])
    if not matcher.is_isomorphic():
        return None
    vmaps: list[dict[str, str]] = [{} for _ in range(a.depth + 1)]
    for (n, v), (_, w) in matcher.mapping.items():
        vmaps[n][v] = w
    emaps: list[dict[str, str]] = [{}]
    for n in range(1, a.depth + 1):
        buckets: dict[tuple[str, str], list[str]] = {}
        for e in b.edges(n):
            buckets.setdefault((e.source, e.range), []).append(e.id)
        emap = {}
        for e in a.edges(n):
            emap[e.id] = buckets[(vmaps[n - 1][e.source], vmaps[n][e.range])].pop(0)
        emaps.append(emap)
    return vmaps, emaps


class Subdiagram:
    """An edge subset F of a host diagram, one set per level.

    The vertex set is induced: level 0 is the root, level n >= 1 is t(F_n).
    """

    def __init__(self, host: BratteliDiagram, edges: Sequence[Iterable[str]]):
        if len(edges) != host.depth:
            raise DiagramError(f"subdiagram needs {host.depth} edge levels, got {len(edges)}")
        self.host = host
        levels: list[frozenset[str]] = []
        for n, ids in enumerate(edges, start=1):
            ids = frozenset(ids)
            for eid in ids:
                if not host.has_edge(n, eid):
                    raise DiagramError(f"unknown edge id {eid!r} at level {n}")
            levels.append(ids)
        self._edges = tuple(levels)

    @classmethod
    def from_paths(cls, host: BratteliDiagram, paths: Iterable[Sequence[str]]) -> "Subdiagram":
        levels: list[set[str]] = [set() for _ in range(host.depth)]
        for p in paths:
            for k, eid in enumerate(p):
                levels[k].add(eid)
        return cls(host, levels)

    @property
    def depth(self) -> int:
        return self.host.depth

    def edge_ids(self, n: int) -> frozenset[str]:
        return self._edges[n - 1]

    def edges(self, n: int) -> list[Edge]:
        """Edges of level n in host order."""
        ids = self._edges[n - 1]
        return [e for e in self.host.edges(n) if e.id in ids]

    def vertices(self, n: int) -> list[str]:
        """Induced vertices of level n in host order."""
        if n == 0:
            return [self.host.root]
        targets = {e.range for e in self.edges(n)}
        return [v for v in self.host.vertices(n) if v in targets]

    def contains(self, path: Sequence[str]) -> bool:
        return all(eid in self._edges[k] for k, eid in enumerate(path))

    def union(self, other: "Subdiagram") -> "Subdiagram":
        if other.host is not self.host and other.host != self.host:
            raise DiagramError("subdiagrams live in different hosts")
        return Subdiagram(self.host, [a | b for a, b in zip(self._edges, other._edges)])

    def as_diagram(self) -> BratteliDiagram:
        return BratteliDiagram(
            [self.vertices(n) for n in range(self.depth + 1)],
            [self.edges(n) for n in range(1, self.depth + 1)])

    def count_paths(self, n: int) -> dict[str, int]:
        counts = {self.host.root: 1}
        for k in range(1, n + 1):
            nxt: dict[str, int] = {}
            for e in self.edges(k):
                if e.source in counts:
                    nxt[e.range] = nxt.get(e.range, 0) + counts[e.source]
            counts = nxt
        return counts

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subdiagram):
            return NotImplemented
        return self.host == other.host and self._edges == other._edges

    def __hash__(self) -> int:
        return hash(self._edges)

    def __repr__(self) -> str:
        return f"Subdiagram(depth={self.depth}, edges={[len(s) for s in self._edges]})"


def validate_subdiagram(s: Subdiagram) -> ValidationReport:
    """Check i(F_{n+1}) == {root} (n = 0) or t(F_n) (n >= 1), level by level."""
    report = ValidationReport()
    host = s.host
    if host.depth == 0:
        return report
    for n in range(host.depth):
        sources = {e.source for e in s.edges(n + 1)}
        expected = {host.root} if n == 0 else {e.range for e in s.edges(n)}
        for v in sorted(expected - sources):
            report.add("dead-end", "vertex of the subdiagram has no outgoing subdiagram edge", n, v)
        for v in sorted(sources - expected):
            report.add("unreached", "edge source is not reached by the subdiagram", n, v)
    return report


STRICT_FULL = "full"
STRICT_SOURCE = "source"


@dataclass(frozen=True)
class DiagramQuotient:
    """Level-respecting vertex and edge maps from `source` onto `target`.

    `vertex_maps[n]` maps V_n ids; `edge_maps[n]` maps E_n ids (index 0 unused).
    """

    source: BratteliDiagram
    target: BratteliDiagram
    vertex_maps: tuple[Mapping[str, str], ...]
    edge_maps: tuple[Mapping[str, str], ...]
    strictness: str = STRICT_FULL

    def __post_init__(self):
        if self.strictness not in (STRICT_FULL, STRICT_SOURCE):
            raise DiagramError(f"unknown strictness {self.strictness!r}")

    @classmethod
    def identity(cls, d: BratteliDiagram, strictness: str = STRICT_SOURCE) -> "DiagramQuotient":
        """Identity maps.  Full strictness additionally needs t injective on E_1."""
        vmaps = tuple({v: v for v in d.vertices(n)} for n in range(d.depth + 1))
        emaps = ({},) + tuple({e.id: e.id for e in d.edges(n)} for n in range(1, d.depth + 1))
        return cls(d, d, vmaps, emaps, strictness)

    def map_vertex(self, n: int, v: str) -> str:
        return self.vertex_maps[n][v]

    def map_edge(self, n: int, eid: str) -> str:
        return self.edge_maps[n][eid]

    def map_path(self, path: Sequence[str]) -> Path:
        return tuple(self.edge_maps[k][eid] for k, eid in enumerate(path, start=1))


def validate_quotient(q: DiagramQuotient) -> ValidationReport:
    src, dst = q.source, q.target
    if src.depth != dst.depth:
        raise DiagramError(f"quotient depth mismatch: {src.depth} vs {dst.depth}")
    report = ValidationReport()
    depth = src.depth
    if len(q.vertex_maps) != depth + 1 or len(q.edge_maps) != depth + 1:
        report.add("shape", "map tables do not match the diagram depth")
        return report
    for n in range(depth + 1):
        vmap = q.vertex_maps[n]
        for v in src.vertices(n):
            if v not in vmap:
                report.add("total", "vertex has no image", n, v)
            elif not dst.has_vertex(n, vmap[v]):
                report.add("total", f"image {vmap[v]!r} is not a target vertex", n, v)
        missing = set(dst.vertices(n)) - set(vmap.values())
        for w in sorted(missing):
            report.add("surjective", "target vertex is not hit", n, w)
    for n in range(1, depth + 1):
        emap = q.edge_maps[n]
        for e in src.edges(n):
            if e.id not in emap or not dst.has_edge(n, emap[e.id]):
                report.add("total", "edge has no valid image", n, e.id)
        missing = {e.id for e in dst.edges(n)} - set(emap.values())
        for eid in sorted(missing):
            report.add("surjective", "target edge is not hit", n, eid)
    if "total" in report.codes():
        return report
    for n in range(1, depth + 1):
        for e in src.edges(n):
            image = dst.edge(n, q.edge_maps[n][e.id])
            if image.source != q.vertex_maps[n - 1][e.source] or image.range != q.vertex_maps[n][e.range]:
                report.add("commute", "edge image does not join the vertex images", n, e.id)
    for n in range(depth):
        for v in src.vertices(n):
            images = [q.edge_maps[n + 1][e.id] for e in src.out_edges(n, v)]
            expected = {e.id for e in dst.out_edges(n, q.vertex_maps[n][v])}
            if len(set(images)) != len(images) or set(images) != expected:
                report.add("source-fiber", f"out-edges map {len(src.out_edges(n, v))} -> "
                           f"{len(set(images))} of {len(expected)}", n, v)
    if q.strictness == STRICT_FULL:
        for n in range(1, depth + 1):
            for v in src.vertices(n):
                images = [q.edge_maps[n][e.id] for e in src.in_edges(n, v)]
                expected = {e.id for e in dst.in_edges(n, q.vertex_maps[n][v])}
                if len(set(images)) != len(images) or set(images) != expected:
                    severity = "error" if n >= 2 else "info"
                    report.add("range-fiber", f"in-edges map {len(images)} -> {len(set(images))} "
                               f"of {len(expected)}", n, v, severity)
        if depth >= 1:
            ranges = [e.range for e in src.edges(1)]
            if len(set(ranges)) != len(ranges):
                report.add("t-injective", "two level-1 edges share a range", 1)
    return report


@dataclass(frozen=True)
class PathBijection:
    level: int
    forward: dict[Path, Path]
    inverse: dict[Path, Path]


def lift_paths(q: DiagramQuotient, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> PathBijection:
    """The map p -> q_E(p) on length-n paths, checked to be a bijection."""
    if not 0 <= n <= q.source.depth:
        raise DiagramError(f"level {n} outside 0..{q.source.depth}")
    src_paths = enumerate_paths(q.source, n, cap)
    dst_paths = set(enumerate_paths(q.target, n, cap))
    forward: dict[Path, Path] = {}
    inverse: dict[Path, Path] = {}
    for p in src_paths:
        image = q.map_path(p)
        if image not in dst_paths:
            raise DiagramError(f"image of {p} is not a target path")
        if image in inverse:
            raise DiagramError(f"paths {inverse[image]} and {p} have the same image")
        forward[p] = image
        inverse[image] = p
    if len(inverse) != len(dst_paths):
        missed = sorted(dst_paths - set(inverse))[0]
        raise DiagramError(f"target path {missed} has no preimage")
    return PathBijection(n, forward, inverse)


class PathLifter:
    """Lifts target paths through a quotient satisfying (i) and (ii) without enumeration."""

    def __init__(self, q: DiagramQuotient):
        self.q = q
        self._step: list[dict[tuple[str, str], Edge]] = [{}]
        for n in range(1, q.source.depth + 1):
            table = {}
            for e in q.source.edges(n):
                table[(e.source, q.edge_maps[n][e.id])] = e
            self._step.append(table)

    def step(self, n: int, vertex: str, target_edge: str) -> Edge:
        """The source-diagram edge of level n leaving `vertex` over `target_edge`."""
        try:
            return self._step[n][(vertex, target_edge)]
        except KeyError:
            raise DiagramError(f"no lift of edge {target_edge!r} at level {n} from {vertex!r}") from None

    def lift(self, path: Sequence[str], start_level: int = 0, start: str | None = None) -> Path:
        vertex = self.q.source.root if start is None else start
        out = []
        for k, eid in enumerate(path, start=start_level + 1):
            e = self.step(k, vertex, eid)
            out.append(e.id)
            vertex = e.range
        return tuple(out)

    def lift_end(self, path: Sequence[str], start_level: int = 0, start: str | None = None) -> str:
        vertex = self.q.source.root if start is None else start
        for k, eid in enumerate(path, start=start_level + 1):
            vertex = self.step(k, vertex, eid).range
        return vertex
