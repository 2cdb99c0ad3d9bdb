"""From finite filtrations to diagrams and back.

A nested chain Δ = R_0 ⊆ R_1 ⊆ ... ⊆ R_M on a finite set X compiles to a
diagram of depth M: level n has one vertex per tower of a groupoid
partition of R_n, and an edge into a level-n tower for each R_{n-1}-subclass
position of its classes.  Every point becomes a root path of length M, and
R_n becomes the truncated cofinality relation from level n.

For a chain transverse to a second relation S the same compiler, run on
R_n ∨ S, yields a second diagram together with a quotient map onto it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

from networkx.utils import UnionFind

from affable.diagram import (
    DEFAULT_ENUMERATION_CAP,
    BratteliDiagram,
    DiagramQuotient,
    Edge,
    Path,
    STRICT_FULL,
    ValidationReport,
    count_paths,
    enumerate_paths,
    lift_paths,
    validate_diagram,
    validate_quotient,
)
from affable.relations import (
    FiniteEqRel,
    GroupoidPartition,
    Point,
    RelationError,
    check_chain,
    find_transversal,
    groupoid_refine,
    join,
    transverse_filtration,
)

ROOT = "v0"


def vertex_at(d: BratteliDiagram, path: Sequence[str], n: int) -> str:
    """Vertex of V_n visited by a root path of length >= n."""
    if n == 0:
        return d.root
    return d.edge(n, path[n - 1]).range


def af_key(d: BratteliDiagram, path: Sequence[str], n: int) -> tuple:
    """Paths share this key iff they pass the same level-n vertex and agree afterwards."""
    return (vertex_at(d, path, n), tuple(path[n:]))


def af_classes_at(d: BratteliDiagram, n: int, depth: int | None = None,
                  cap: int = DEFAULT_ENUMERATION_CAP) -> list[tuple[Path, ...]]:
    """Classes of length-`depth` paths equal from coordinate n+1 on and meeting at level n.

    With n == depth this is "same terminal vertex".  Class sizes are checked
    against the path counts at level n.
    """
    depth = d.depth if depth is None else depth
    if not 0 <= n <= depth <= d.depth:
        raise ValueError(f"need 0 <= n <= N <= {d.depth}, got n={n}, N={depth}")
    groups: dict[tuple, list[Path]] = {}
    for p in enumerate_paths(d, depth, cap):
        groups.setdefault(af_key(d, p, n), []).append(p)
    counts = count_paths(d, n).counts
    for (v, _), members in groups.items():
        if len(members) != counts[v]:
            raise RuntimeError(f"class through {v!r} has {len(members)} paths, expected {counts[v]}")
    return [tuple(m) for m in groups.values()]


@dataclass(frozen=True)
class PathCoding:
    """Bijection between the points of X and the root paths of full depth."""

    diagram: BratteliDiagram
    paths: dict[Point, Path]

    def __post_init__(self):
        object.__setattr__(self, "_points", {p: x for x, p in self.paths.items()})

    def point(self, path: Sequence[str]) -> Point:
        return self._points[tuple(path)]

    def image_classes(self, rel: FiniteEqRel) -> set[frozenset]:
        return {frozenset(self.paths[x] for x in c) for c in rel.classes}

    def verify(self) -> ValidationReport:
        report = ValidationReport()
        targets = enumerate_paths(self.diagram, self.diagram.depth)
        if len(self._points) != len(self.paths):
            report.add("injective", "two points share a path")
        if set(targets) != set(self.paths.values()):
            report.add("surjective", f"{len(self.paths)} points code {len(set(self.paths.values()))} "
                       f"of {len(targets)} paths")
        return report


@dataclass(frozen=True)
class FiltrationDiagram:
    diagram: BratteliDiagram
    coding: PathCoding
    partitions: tuple[GroupoidPartition, ...]
    chain: tuple[FiniteEqRel, ...]


def diagram_from_filtration(points: Sequence[Point], chain: Sequence[FiniteEqRel],
                            pair_labels: Sequence[dict] | None = None) -> FiltrationDiagram:
    """Compile a nested chain starting at the diagonal into a diagram of depth len(chain)-1.

    `pair_labels`, when given, supplies for each level n >= 1 an extra
    label on the pairs of R_n that the groupoid partition must refine.
    Points are labelled by themselves, so towers are single classes.
    """
    check_chain(chain)
    points = tuple(points)
    if any(set(r.points) != set(points) for r in chain):
        raise RelationError("chain members live on different point sets")
    depth = len(chain) - 1
    if depth == 0 and len(points) > 1:
        raise RelationError("a chain with no level above the diagonal cannot code more than one point")
    point_labels = {x: x for x in points}
    partitions: list[GroupoidPartition] = []
    vertices: list[list[str]] = [[ROOT]]
    edges: list[list[Edge]] = []
    codes: dict[Point, list[str]] = {x: [] for x in points}
    tower_of: dict[Point, str] = {x: ROOT for x in points}
    previous_labels: dict | None = None
    for n in range(1, depth + 1):
        rn, below = chain[n], chain[n - 1]
        labels = {}
        for pair in rn.pairs():
            old = previous_labels.get(pair) if previous_labels is not None else None
            if pair in below:
                base = ("old", old)
            else:
                base = ("new",)
            extra = pair_labels[n].get(pair) if pair_labels else None
            labels[pair] = (base, extra)
        gp = groupoid_refine(rn, labels, point_labels)
        partitions.append(gp)
        names = [f"T{k}" for k in range(len(gp.towers))]
        level_edges: list[Edge] = []
        new_tower_of: dict[Point, str] = {}
        for name, tower in zip(names, gp.towers):
            first = tower.classes[0]
            groups: list[list[int]] = []
            group_of: dict[int, int] = {}
            for i, x in enumerate(first):
                for g, members in enumerate(groups):
                    if below.related(first[members[0]], x):
                        members.append(i)
                        group_of[i] = g
                        break
                else:
                    group_of[i] = len(groups)
                    groups.append([i])
            for g, members in enumerate(groups):
                level_edges.append(Edge(f"{name}:{g}", tower_of[first[members[0]]], name))
            for c in tower.classes:
                for i, x in enumerate(c):
                    codes[x].append(f"{name}:{group_of[i]}")
                    new_tower_of[x] = name
        vertices.append(names)
        edges.append(level_edges)
        tower_of = new_tower_of
        previous_labels = gp.pair_labels()
    d = BratteliDiagram(vertices, edges)
    coding = PathCoding(d, {x: tuple(p) for x, p in codes.items()})
    fd = FiltrationDiagram(d, coding, tuple(partitions), tuple(chain))
    check = coding.verify()
    check.extend(height_recursion_report(fd))
    if not check.ok:
        raise RelationError(f"compiled diagram is inconsistent: {check.summary()}")
    return fd


def height_recursion_report(fd: FiltrationDiagram) -> ValidationReport:
    """Tower heights equal the weighted sum of the heights feeding them."""
    report = ValidationReport()
    d = fd.diagram
    for n, gp in enumerate(fd.partitions, start=1):
        heights = {f"T{k}": t.height for k, t in enumerate(gp.towers)}
        below = {ROOT: 1} if n == 1 else {f"T{k}": t.height for k, t in enumerate(fd.partitions[n - 2].towers)}
        for v in d.vertices(n):
            total = sum(below[e.source] for e in d.in_edges(n, v))
            if total != heights[v]:
                report.add("height", f"sum of feeding heights {total} != tower height {heights[v]}", n, v)
        counts = count_paths(d, n).counts
        for v, h in heights.items():
            if counts[v] != h:
                report.add("path-count", f"{counts[v]} root paths but height {h}", n, v)
        if n == 1:
            for v in d.vertices(1):
                if len(d.in_edges(1, v)) != heights[v]:
                    report.add("first-level", "root edge count differs from tower height", 1, v)
    return report


def round_trip_report(fd: FiltrationDiagram, cap: int = DEFAULT_ENUMERATION_CAP) -> ValidationReport:
    """F carries each R_n class onto a truncated cofinality class from level n."""
    report = ValidationReport()
    d, depth = fd.diagram, fd.diagram.depth
    for n, rn in enumerate(fd.chain):
        expected = fd.coding.image_classes(rn)
        got = {frozenset(c) for c in af_classes_at(d, n, depth, cap)}
        if expected != got:
            report.add("round-trip", f"{len(expected ^ got)} classes differ", n)
    return report


class TransverseBuildError(RuntimeError):
    def __init__(self, report: ValidationReport):
        super().__init__(report.summary())
        self.report = report


@dataclass(frozen=True)
class TransverseBuild:
    """d from {R_n}, d' from {R_n ∨ S} and the quotient q: d -> d'."""

    points: tuple[Point, ...]
    chain: tuple[FiniteEqRel, ...]
    s: FiniteEqRel
    small: FiltrationDiagram
    large: FiltrationDiagram
    quotient: DiagramQuotient
    shift: int

    @property
    def d(self) -> BratteliDiagram:
        return self.small.diagram

    @property
    def d_prime(self) -> BratteliDiagram:
        return self.large.diagram


def _four_block(rn: FiniteEqRel, s: FiniteEqRel, jn: FiniteEqRel) -> dict:
    labels = {}
    for x, y in jn.pairs():
        if x == y:
            labels[(x, y)] = "diagonal"
        elif rn.related(x, y):
            labels[(x, y)] = "R"
        elif s.related(x, y):
            labels[(x, y)] = "S"
        else:
            labels[(x, y)] = "rest"
    return labels


def transverse_diagrams(points: Sequence[Point], chain: Sequence[FiniteEqRel],
                        s: FiniteEqRel) -> TransverseBuild:
    """Build d, d' and q for a chain whose top relation is transverse to S.

    The chain is first shrunk so that every member is transverse to S.  If
    its first nontrivial member sits at level 1, a diagonal level is put in
    front so that level 1 of d' carries S alone; `shift` records this.
    """
    points = tuple(points)
    check_chain(chain)
    witness = find_transversal(chain[-1], s)
    shrunk = transverse_filtration(chain, witness)
    shift = 0
    if len(shrunk) < 2 or not shrunk[1].is_identity():
        shrunk = [shrunk[0]] + shrunk
        shift = 1
    small = diagram_from_filtration(points, shrunk)
    joined = [FiniteEqRel.identity(points)] + [join(rn, s) for rn in shrunk[1:]]
    blocks = [{}] + [_four_block(rn, s, jn) for rn, jn in zip(shrunk[1:], joined[1:])]
    large = diagram_from_filtration(points, joined, blocks)
    depth = len(shrunk) - 1

    vmaps: list[dict[str, str]] = [{ROOT: ROOT}] + [{} for _ in range(depth)]
    emaps: list[dict[str, str]] = [{}] + [{} for _ in range(depth)]
    for x in points:
        p, p2 = small.coding.paths[x], large.coding.paths[x]
        for n in range(1, depth + 1):
            for table, key, value in (
                    (emaps[n], p[n - 1], p2[n - 1]),
                    (vmaps[n], small.diagram.edge(n, p[n - 1]).range, large.diagram.edge(n, p2[n - 1]).range)):
                if table.setdefault(key, value) != value:
                    report = ValidationReport()
                    report.add("refinement", f"{key!r} would map to both {table[key]!r} and {value!r}", n)
                    raise TransverseBuildError(report)
    q = DiagramQuotient(small.diagram, large.diagram, tuple(vmaps), tuple(emaps), STRICT_FULL)
    build = TransverseBuild(points, tuple(shrunk), s, small, large, q, shift)
    report = check_transverse_build(build)
    if not report.ok:
        raise TransverseBuildError(report)
    return build


def check_transverse_build(tb: TransverseBuild, cap: int = DEFAULT_ENUMERATION_CAP) -> ValidationReport:
    """Quotient conditions, S as level-1 cofinality of d', the joint-generation law, and bookkeeping."""
    report = ValidationReport()
    for name, fd in (("d", tb.small), ("d'", tb.large)):
        for issue in validate_diagram(fd.diagram).issues + height_recursion_report(fd).issues \
                + round_trip_report(fd, cap).issues:
            report.add(issue.code, f"{name}: {issue.detail}", issue.level, issue.item, issue.severity)
    report.extend(validate_quotient(tb.quotient))
    if not report.ok:
        return report
    depth = tb.d.depth
    s_classes = tb.large.coding.image_classes(tb.s)
    af1 = {frozenset(c) for c in af_classes_at(tb.d_prime, 1, depth, cap)}
    if s_classes != af1:
        report.add("s-level-one", "level-1 cofinality of d' differs from S")
    lift = lift_paths(tb.quotient, depth, cap)
    uf = UnionFind(enumerate_paths(tb.d_prime, depth, cap))
    for c in af1:
        uf.union(*c)
    for c in af_classes_at(tb.d, depth, depth, cap):
        uf.union(*(lift.forward[p] for p in c))
    generated = {frozenset(c) for c in uf.to_sets()}
    terminal = {frozenset(c) for c in af_classes_at(tb.d_prime, depth, depth, cap)}
    if generated != terminal:
        report.add("joint-generation", "level-1 cofinality with lifted terminal classes "
                   "does not generate the terminal relation of d'")
    for x in tb.points:
        if lift.forward[tb.small.coding.paths[x]] != tb.large.coding.paths[x]:
            report.add("coding", f"quotient does not carry the code of {x!r}")
            break
    for n, rn in enumerate(tb.chain):
        try:
            find_transversal(rn, tb.s)
        except Exception as exc:  # noqa: BLE001 - reported, not raised
            report.add("factorization", f"R_{n} not transverse to S: {exc}", n)
        sizes = count_paths(tb.d, n).counts
        if rn.max_class_size() > max(sizes.values()):
            report.add("uniform-finite", "class larger than every tower", n)
    return report


def chain_from_partitions(points: Sequence[Point], levels: Sequence[Sequence[Sequence[Hashable]]]) -> list[FiniteEqRel]:
    return [FiniteEqRel(points, classes) for classes in levels]
