"""Equivalence relations on finite point sets.

This is the discrete stand-in for compact étale equivalence relations: a
relation is a partition of an ordered point set.  Point order is the
canonical order used everywhere (class listings, floor positions, search
order), so results do not depend on hashing.

Two relations R and S are transverse when R ∩ S is the diagonal and every
composable pair x R y S z can be rewritten uniquely as x S y' R z.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from networkx.utils import UnionFind

from affable.diagram import ValidationReport

Point = Hashable
Pair = tuple[Point, Point]


class RelationError(ValueError):
    """Malformed relation input or mismatched point sets."""


class NotTransverse(Exception):
    """Transversality fails; `pair` and `composable` locate the first failure."""

    def __init__(self, reason: str, pair: Pair | None = None,
                 composable: tuple[Pair, Pair] | None = None):
        super().__init__(reason)
        self.reason = reason
        self.pair = pair
        self.composable = composable


class NotFree(Exception):
    """A non-identity group element fixes a point."""

    def __init__(self, point: Point, element: dict):
        self.point = point
        self.element = element
        super().__init__(f"point {point!r} is fixed by the non-identity element {format_cycles(element)}")


class FiniteEqRel:
    """A partition of an ordered finite point set.

    Classes are stored in canonical form: each class sorted by point order,
    classes ordered by their first point.  Points missing from `classes`
    become singletons.
    """

    def __init__(self, points: Sequence[Point], classes: Iterable[Iterable[Point]] = ()):
        self.points: tuple[Point, ...] = tuple(points)
        self._pos = {x: k for k, x in enumerate(self.points)}
        if len(self._pos) != len(self.points):
            raise RelationError("duplicate points")
        label: dict[Point, int] = {}
        raw: list[list[Point]] = []
        for cls in classes:
            members = list(cls)
            for x in members:
                if x not in self._pos:
                    raise RelationError(f"class member {x!r} is not a point")
                if x in label:
                    raise RelationError(f"point {x!r} lies in two classes")
                label[x] = len(raw)
            if members:
                raw.append(members)
        for x in self.points:
            if x not in label:
                label[x] = len(raw)
                raw.append([x])
        canon = sorted((tuple(sorted(c, key=self._pos.__getitem__)) for c in raw),
                       key=lambda c: self._pos[c[0]])
        self.classes: tuple[tuple[Point, ...], ...] = tuple(canon)
        self._class_of: dict[Point, int] = {x: k for k, c in enumerate(canon) for x in c}

    @classmethod
    def identity(cls, points: Sequence[Point]) -> "FiniteEqRel":
        return cls(points)

    @classmethod
    def full(cls, points: Sequence[Point]) -> "FiniteEqRel":
        return cls(points, [points])

    @classmethod
    def from_pairs(cls, points: Sequence[Point], pairs: Iterable[Pair]) -> "FiniteEqRel":
        """The equivalence relation generated by `pairs`."""
        uf = UnionFind(points)
        for x, y in pairs:
            uf.union(x, y)
        return cls(points, uf.to_sets())

    @classmethod
    def from_labels(cls, points: Sequence[Point], label: Mapping[Point, Hashable]) -> "FiniteEqRel":
        groups: dict[Hashable, list[Point]] = {}
        for x in points:
            groups.setdefault(label[x], []).append(x)
        return cls(points, groups.values())

    def position(self, x: Point) -> int:
        return self._pos[x]

    def class_index(self, x: Point) -> int:
        return self._class_of[x]

    def class_of(self, x: Point) -> tuple[Point, ...]:
        return self.classes[self._class_of[x]]

    def related(self, x: Point, y: Point) -> bool:
        return self._class_of[x] == self._class_of[y]

    def __contains__(self, pair: Pair) -> bool:
        x, y = pair
        return x in self._class_of and y in self._class_of and self.related(x, y)

    def pairs(self) -> Iterator[Pair]:
        for c in self.classes:
            for x in c:
                for y in c:
                    yield (x, y)

    def num_pairs(self) -> int:
        return sum(len(c) ** 2 for c in self.classes)

    def is_identity(self) -> bool:
        return all(len(c) == 1 for c in self.classes)

    def refines(self, other: "FiniteEqRel") -> bool:
        """Pair-set inclusion self ⊆ other."""
        _same_points(self, other)
        return all(other.related(c[0], x) for c in self.classes for x in c)

    __le__ = refines

    def intersect(self, other: "FiniteEqRel") -> "FiniteEqRel":
        _same_points(self, other)
        label = {x: (self._class_of[x], other._class_of[x]) for x in self.points}
        return FiniteEqRel.from_labels(self.points, label)

    def restrict(self, subset: Iterable[Point]) -> "FiniteEqRel":
        keep = set(subset)
        pts = [x for x in self.points if x in keep]
        return FiniteEqRel(pts, [[x for x in c if x in keep] for c in self.classes])

    def max_class_size(self) -> int:
        return max((len(c) for c in self.classes), default=0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteEqRel):
            return NotImplemented
        return set(self.points) == set(other.points) and {frozenset(c) for c in self.classes} == {
            frozenset(c) for c in other.classes}

    def __hash__(self) -> int:
        return hash(frozenset(frozenset(c) for c in self.classes))

    def __repr__(self) -> str:
        return "FiniteEqRel{" + "|".join(" ".join(map(str, c)) for c in self.classes) + "}"


def _same_points(r: FiniteEqRel, s: FiniteEqRel) -> None:
    if set(r.points) != set(s.points):
        raise RelationError("relations live on different point sets")


def join(r: FiniteEqRel, s: FiniteEqRel) -> FiniteEqRel:
    """Smallest equivalence relation containing both."""
    _same_points(r, s)
    uf = UnionFind(r.points)
    for rel in (r, s):
        for c in rel.classes:
            uf.union(*c)
    return FiniteEqRel(r.points, uf.to_sets())


@dataclass(frozen=True)
class TransversalWitness:
    """The rewriting h: (x R y S z) -> (x S y' R z), stored as (x, y, z) -> y'."""

    r: FiniteEqRel
    s: FiniteEqRel
    rewrite: dict[tuple[Point, Point, Point], Point] = field(repr=False)

    def h(self, x: Point, y: Point, z: Point) -> tuple[Pair, Pair]:
        y2 = self.rewrite[(x, y, z)]
        return (x, y2), (y2, z)

    def composable(self) -> Iterator[tuple[Point, Point, Point]]:
        return iter(self.rewrite)


def composable_triples(first: FiniteEqRel, second: FiniteEqRel) -> Iterator[tuple[Point, Point, Point]]:
    """Triples (x, y, z) with (x, y) in `first` and (y, z) in `second`, in point order."""
    for x in first.points:
        for y in first.class_of(x):
            for z in second.class_of(y):
                yield (x, y, z)


def find_transversal(r: FiniteEqRel, s: FiniteEqRel) -> TransversalWitness:
    """Search exhaustively for the rewriting h; raise NotTransverse on the first failure.

    On success the witness is also checked against the counting identities:
    (x, y, z) -> (x, z) is a bijection from R ×_X S onto R ∨ S, and likewise
    from S ×_X R.
    """
    _same_points(r, s)
    for c in r.classes:
        seen: dict[int, Point] = {}
        for x in c:
            k = s.class_index(x)
            if k in seen:
                raise NotTransverse("R ∩ S is larger than the diagonal", pair=(seen[k], x))
            seen[k] = x
    rewrite: dict[tuple[Point, Point, Point], Point] = {}
    for x, y, z in composable_triples(r, s):
        target = set(r.class_of(z))
        candidates = [y2 for y2 in s.class_of(x) if y2 in target]
        if len(candidates) != 1:
            why = "no" if not candidates else f"{len(candidates)}"
            raise NotTransverse(f"{why} rewriting point for (({x},{y}),({y},{z}))",
                                pair=(x, y), composable=((x, y), (y, z)))
        rewrite[(x, y, z)] = candidates[0]
    w = TransversalWitness(r, s, rewrite)
    joined = join(r, s)
    for first, second in ((r, s), (s, r)):
        ends = [(x, z) for x, _, z in composable_triples(first, second)]
        if len(ends) != len(set(ends)) or len(ends) != joined.num_pairs():
            raise NotTransverse("composable pairs do not biject onto the join")
    check = verify_witness(w)
    if not check.ok:
        raise NotTransverse(f"witness fails its own laws: {check.summary()}")
    return w


def verify_witness(w: TransversalWitness) -> ValidationReport:
    """Check r∘h = r, s∘h = s, bijectivity of h, R ∩ S = Δ and the transport property."""
    report = ValidationReport()
    r, s = w.r, w.s
    if not r.intersect(s).is_identity():
        report.add("diagonal", "R ∩ S is not the diagonal")
    images = set()
    for (x, y, z), y2 in w.rewrite.items():
        if (x, y2) not in s or (y2, z) not in r:
            report.add("h-image", f"h({x},{y},{z}) = {y2} is not in S ×_X R")
        images.add((x, y2, z))
    expected = set(composable_triples(s, r))
    if images != expected:
        report.add("h-bijective", f"h hits {len(images)} of {len(expected)} composable pairs")
    for x in r.points:
        for y in r.class_of(x):
            partners = [w.rewrite[(x, y, z)] for z in s.class_of(y)]
            if sorted(map(r.position, partners)) != sorted(map(r.position, s.class_of(x))):
                report.add("transport", f"h does not match the S-classes of {x} and {y}")
            for z, y2 in zip(s.class_of(y), partners):
                if not r.related(y2, z):
                    report.add("transport", f"transported point {y2} is not R-related to {z}")
    return report


def class_size_check(w: TransversalWitness) -> ValidationReport:
    """Equal S-class sizes along R, and every join class of size m·n."""
    report = ValidationReport()
    r, s = w.r, w.s
    for x, y in r.pairs():
        if len(s.class_of(x)) != len(s.class_of(y)):
            report.add("s-size", f"#[{x}]_S = {len(s.class_of(x))} but #[{y}]_S = {len(s.class_of(y))}")
    for c in join(r, s).classes:
        m = len({r.class_index(x) for x in c})
        n = len({s.class_index(x) for x in c})
        if len(c) != m * n:
            report.add("product", f"join class of size {len(c)} has {m} R-classes and {n} S-classes",
                       item=str(c[0]))
    return report


@dataclass(frozen=True)
class Tower:
    """Classes sharing one decorated type; floor i is the set of i-th members."""

    signature: tuple
    classes: tuple[tuple[Point, ...], ...]

    @property
    def height(self) -> int:
        return len(self.classes[0])

    def floor(self, i: int) -> frozenset:
        return frozenset(c[i] for c in self.classes)

    def graph(self, i: int, j: int) -> dict[Point, Point]:
        """The partial bijection floor i -> floor j."""
        return {c[i]: c[j] for c in self.classes}


@dataclass(frozen=True)
class GroupoidPartition:
    host: FiniteEqRel
    towers: tuple[Tower, ...]

    def floors(self) -> list[frozenset]:
        return [t.floor(i) for t in self.towers for i in range(t.height)]

    def graph_keys(self) -> Iterator[tuple[int, int, int]]:
        for k, t in enumerate(self.towers):
            for i in range(t.height):
                for j in range(t.height):
                    yield (k, i, j)

    def locate(self) -> dict[Point, tuple[int, int]]:
        """point -> (tower index, floor position)."""
        where = {}
        for k, t in enumerate(self.towers):
            for c in t.classes:
                for i, x in enumerate(c):
                    where[x] = (k, i)
        return where

    def pair_labels(self) -> dict[Pair, tuple[int, int, int]]:
        """Each host pair labelled by the graph (tower, i, j) containing it."""
        labels = {}
        for k, t in enumerate(self.towers):
            for c in t.classes:
                for i, x in enumerate(c):
                    for j, y in enumerate(c):
                        labels[(x, y)] = (k, i, j)
        return labels


def groupoid_refine(r: FiniteEqRel, pair_labels: Mapping[Pair, Hashable],
                    point_labels: Mapping[Point, Hashable]) -> GroupoidPartition:
    """Group classes of `r` by decorated type.

    The type of a class (listed in point order) records its size, the point
    label of each member and the pair label of each ordered pair of members.
    Towers are the types in order of first appearance.
    """
    for x in r.points:
        if x not in point_labels:
            raise RelationError(f"point partition misses {x!r}")
    towers: dict[tuple, list[tuple[Point, ...]]] = {}
    for c in r.classes:
        try:
            pairs = tuple(tuple(pair_labels[(x, y)] for y in c) for x in c)
        except KeyError as exc:
            raise RelationError(f"pair partition misses {exc.args[0]!r}") from None
        signature = (len(c), tuple(point_labels[x] for x in c), pairs)
        towers.setdefault(signature, []).append(c)
    return GroupoidPartition(r, tuple(Tower(sig, tuple(cs)) for sig, cs in towers.items()))


def check_groupoid_partition(gp: GroupoidPartition) -> ValidationReport:
    """Exhaustive check of the groupoid-partition axioms on the finite model."""
    report = ValidationReport()
    covered: dict[Pair, tuple[int, int, int]] = {}
    for k, t in enumerate(gp.towers):
        if any(len(c) != t.height for c in t.classes):
            report.add("height", "classes of unequal size share a tower", item=str(k))
            continue
        for i, j in itertools.product(range(t.height), repeat=2):
            g = t.graph(i, j)
            if len(set(g.values())) != len(g) or set(g.values()) != t.floor(j):
                report.add("bijection", f"graph ({k},{i},{j}) is not a bijection between floors")
            if i == j and any(a != b for a, b in g.items()):
                report.add("diagonal", f"graph ({k},{i},{i}) is not an identity")
            for a, b in g.items():
                if (a, b) not in gp.host:
                    report.add("inside-host", f"pair ({a},{b}) of graph ({k},{i},{j}) is not in the host")
                if (a, b) in covered:
                    report.add("disjoint", f"pair ({a},{b}) lies in two graphs")
                covered[(a, b)] = (k, i, j)
            inverse = t.graph(j, i)
            if any(inverse[b] != a for a, b in g.items()):
                report.add("inverse", f"graph ({k},{j},{i}) is not the inverse of ({k},{i},{j})")
            for m in range(t.height):
                composed = {a: t.graph(j, m)[b] for a, b in g.items()}
                if composed != t.graph(i, m):
                    report.add("compose", f"graphs ({k},{i},{j})·({k},{j},{m}) leave the partition")
    if len(covered) != gp.host.num_pairs():
        report.add("cover", f"graphs cover {len(covered)} of {gp.host.num_pairs()} pairs")
    floors = gp.floors()
    if sum(len(f) for f in floors) != len(gp.host.points) or len(set().union(*floors)) != len(gp.host.points):
        report.add("floors", "floors do not partition the points")
    return report


def transverse_filtration(chain: Sequence[FiniteEqRel], w: TransversalWitness) -> list[FiniteEqRel]:
    """Shrink each R_n to the pairs whose h-transport stays inside R_n.

    The result is again a nested chain of equivalence relations, each
    transverse to S, with the same top relation.
    """
    check_chain(chain)
    top = chain[-1]
    if top != w.r:
        raise RelationError("witness does not belong to the top of the chain")
    s = w.s
    out = []
    for rn in chain:
        keep = set()
        for x, y in rn.pairs():
            if all(rn.related(w.rewrite[(x, y, z)], z) for z in s.class_of(y)):
                keep.add((x, y))
        _require_equivalence(rn.points, keep)
        shrunk = FiniteEqRel.from_pairs(rn.points, keep)
        find_transversal(shrunk, s)
        out.append(shrunk)
    if out[-1] != top:
        raise RelationError("filtration lost pairs of the top relation")
    return out


def _require_equivalence(points: Sequence[Point], pairs: set[Pair]) -> None:
    for x in points:
        if (x, x) not in pairs:
            raise RelationError(f"shrunk relation is not reflexive at {x!r}")
    succ: dict[Point, set[Point]] = {}
    for x, y in pairs:
        if (y, x) not in pairs:
            raise RelationError(f"shrunk relation is not symmetric at ({x!r},{y!r})")
        succ.setdefault(x, set()).add(y)
    for x, y in pairs:
        for z in succ[y]:
            if (x, z) not in pairs:
                raise RelationError(f"shrunk relation is not transitive at ({x!r},{y!r},{z!r})")


def check_chain(chain: Sequence[FiniteEqRel], start_at_identity: bool = True) -> None:
    if not chain:
        raise RelationError("empty chain")
    if start_at_identity and not chain[0].is_identity():
        raise RelationError("chain must start with the diagonal")
    for k, (a, b) in enumerate(zip(chain, chain[1:]), start=1):
        if not a.refines(b):
            raise RelationError(f"chain is not nested at step {k}")


def permutation(points: Sequence[Point], mapping: Mapping[Point, Point]) -> dict[Point, Point]:
    """Complete a partial mapping by fixing unmentioned points; check it is a bijection."""
    pts = set(points)
    perm = {x: mapping.get(x, x) for x in points}
    for x, y in mapping.items():
        if x not in pts or y not in pts:
            raise RelationError(f"permutation moves {x!r} to {y!r} outside the point set")
    if set(perm.values()) != pts:
        raise RelationError("generator is not a permutation")
    return perm


def permutation_from_cycles(points: Sequence[Point], cycles: Sequence[Sequence[Point]]) -> dict[Point, Point]:
    mapping: dict[Point, Point] = {}
    for cyc in cycles:
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            if a in mapping:
                raise RelationError(f"point {a!r} appears in two cycles")
            mapping[a] = b
    return permutation(points, mapping)


def format_cycles(perm: Mapping[Point, Point]) -> str:
    seen = set()
    parts = []
    for x in perm:
        if x in seen or perm[x] == x:
            continue
        cyc = [x]
        seen.add(x)
        y = perm[x]
        while y != x:
            cyc.append(y)
            seen.add(y)
            y = perm[y]
        parts.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(parts) or "()"


def relation_from_group_action(points: Sequence[Point], generators: Sequence[Mapping[Point, Point]]) -> FiniteEqRel:
    """Orbit relation of the group generated by `generators`; the action must be free.

    The group is enumerated breadth first.  A free action has at most #X
    elements, so the search stops as soon as a fixed point shows up.
    """
    points = tuple(points)
    gens = [permutation(points, g) for g in generators]
    identity = tuple(points)
    seen = {identity}
    queue = deque([identity])
    while queue:
        elem = queue.popleft()
        for g in gens:
            nxt = tuple(g[y] for y in elem)
            if nxt in seen:
                continue
            as_map = dict(zip(points, nxt))
            for x in points:
                if as_map[x] == x:
                    raise NotFree(x, as_map)
            seen.add(nxt)
            queue.append(nxt)
    uf = UnionFind(points)
    for g in gens:
        for x in points:
            uf.union(x, g[x])
    return FiniteEqRel(points, uf.to_sets())
