"""Absorbing a transverse relation into an AF relation at finite depth.

Inputs are a host diagram (V, E), a subdiagram (W̃, F̃) that is a copy of
a template diagram W, and a quotient q: W -> W' whose level-1 cofinality
on W' encodes the relation K to be absorbed.

The construction
  1. picks a spine path e_1, e_2, ... avoiding W̃,
  2. plants below each spine vertex t(e_j) a replica of W' (replica j),
  3. rewrites the host: every replica vertex v is split into the W-vertices
     over it, replica edges become W-edges, and the remaining edges are
     copied so that the new diagram still lifts host paths bijectively,
  4. exposes the shift map α (Y -> replica 1, replica j -> replica j+1),
  5. checks that same-terminal in the rewritten diagram, together with the
     replica relations K_j, generates the host cofinality relations.

Every free choice is resolved by taking the least admissible id in host
order; an optional seed shuffles candidates to explore other admissible
choices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from networkx.utils import UnionFind

from affable.diagram import (
    DEFAULT_ENUMERATION_CAP,
    BratteliDiagram,
    DiagramError,
    DiagramQuotient,
    Edge,
    Path,
    PathLifter,
    STRICT_FULL,
    STRICT_SOURCE,
    Subdiagram,
    ValidationReport,
    all_path_counts,
    enumerate_paths,
    graded_isomorphism,
    lift_paths,
    truncate,
    validate_diagram,
    validate_quotient,
    validate_subdiagram,
)
from affable.transforms import simplicity_window, thinness_bound

SPLIT = "~"


class AbsorptionError(RuntimeError):
    """A stage of the construction cannot proceed."""


@dataclass(frozen=True)
class Embedding:
    """A template diagram drawn inside a host: template level l sits at host level offset + l.

    `vertex_maps[l]` and `edge_maps[l]` translate template ids of level l;
    `edge_maps[0]` is empty.
    """

    offset: int
    vertex_maps: tuple[dict[str, str], ...]
    edge_maps: tuple[dict[str, str], ...]

    @property
    def depth(self) -> int:
        return len(self.vertex_maps) - 1

    @property
    def root(self) -> str:
        return next(iter(self.vertex_maps[0].values()))

    def path(self, template_path: Sequence[str]) -> Path:
        return tuple(self.edge_maps[l][eid] for l, eid in enumerate(template_path, start=1))

    def host_vertices(self, level: int) -> set[str]:
        """Host vertices of host level `level` used by template levels >= 1."""
        l = level - self.offset
        if l < 1 or l > self.depth:
            return set()
        return set(self.vertex_maps[l].values())

    def host_edges(self, level: int) -> set[str]:
        l = level - self.offset
        if l < 1 or l > self.depth:
            return set()
        return set(self.edge_maps[l].values())


@dataclass(frozen=True)
class Templates:
    """The quotient q: W -> W' with helpers for fibers and the relation K."""

    quotient: DiagramQuotient

    @property
    def w(self) -> BratteliDiagram:
        return self.quotient.source

    @property
    def w_prime(self) -> BratteliDiagram:
        return self.quotient.target

    @property
    def depth(self) -> int:
        return self.w.depth

    def vertex_fiber(self, level: int, v: str) -> list[str]:
        vmap = self.quotient.vertex_maps[level]
        return [x for x in self.w.vertices(level) if vmap[x] == v]

    def edge_fiber(self, level: int, eid: str) -> list[Edge]:
        emap = self.quotient.edge_maps[level]
        return [e for e in self.w.edges(level) if emap[e.id] == eid]

    def k_key(self, w_path: Sequence[str]) -> tuple:
        """Paths of W are K-related iff their images in W' agree from level 1 on."""
        image = self.quotient.map_path(w_path)
        if not image:
            return ((),)
        return (self.w_prime.edge(1, image[0]).range, image[1:])

    def restricted(self, depth: int) -> "Templates":
        q = self.quotient
        return Templates(DiagramQuotient(truncate(q.source, depth), truncate(q.target, depth),
                                         q.vertex_maps[: depth + 1], q.edge_maps[: depth + 1], q.strictness))


def empty_templates(depth: int) -> Templates:
    """Templates for an empty Y: W = W' is the root alone."""
    d = BratteliDiagram([["v0"]] + [[] for _ in range(depth)], [[] for _ in range(depth)])
    return Templates(DiagramQuotient.identity(d, STRICT_FULL))


def identity_templates(w: BratteliDiagram) -> Templates:
    """W' = W with the identity quotient: nothing is absorbed."""
    return Templates(DiagramQuotient.identity(w, STRICT_FULL))


def template_sizes(t: Templates, depth: int) -> tuple[list[int], list[int]]:
    """#W_k and #F_k for k = 0..depth (zero beyond the template depth)."""
    ws = [len(t.w.vertices(k)) if k <= t.depth else 0 for k in range(depth + 1)]
    fs = [0] + [len(t.w.edges(k)) if k <= t.depth else 0 for k in range(1, depth + 1)]
    return ws, fs


def capacity_request_for(t: Templates, depth: int) -> tuple[list[int], list[int]]:
    """Lower bounds (a_n, b_n) that make a host satisfy the capacity conditions for `t`."""
    ws, fs = template_sizes(t, depth)
    counts = all_path_counts(t.w) if t.depth else [{"v0": 1}]
    a, b = [], []
    for n in range(1, depth + 1):
        a.append(max(ws[n] + 1 + sum(ws[1:n]), 2 * ws[n], 1))
        most = max(counts[n].values(), default=0) if n <= t.depth else 0
        b.append(max(1, 2 * sum(fs[1:n]), 2 * most))
    return a, b


def check_capacity_conditions(host: BratteliDiagram, y_sub: Subdiagram, templates: Templates) -> ValidationReport:
    """The room and multiplicity bounds needed to plant replicas, plus the half bounds for W̃."""
    report = ValidationReport()
    depth = host.depth
    if templates.depth < depth:
        report.add("template-depth", f"template depth {templates.depth} below host depth {depth}")
        return report
    ws, fs = template_sizes(templates, depth)
    host_counts = all_path_counts(host)
    for n in range(1, depth + 1):
        size, wt = len(host.vertices(n)), len(y_sub.vertices(n))
        need = wt + 1 + sum(ws[1:n])
        if size < need:
            report.add("room", f"#V = {size} < #W̃ + 1 + sum #W_k = {need}", n)
        if 2 * wt > size:
            report.add("half-vertices", f"#W̃ = {wt} > #V/2 = {Fraction(size, 2)}", n)
        bound = 2 * sum(fs[1:n])
        if bound:
            least = min((len(host.out_edges(n - 1, v)) and _min_multiplicity_from(host, n, v)
                         for v in host.vertices(n - 1)), default=0)
            if least < bound:
                report.add("multiplicity", f"min multiplicity {least} < 2 sum #F_k = {bound}", n)
        sub_counts = y_sub.count_paths(n)
        for w, c in sub_counts.items():
            if 2 * c > host_counts[n][w]:
                report.add("half-paths", f"{c} W̃-paths > half of {host_counts[n][w]} host paths", n, w)
    return report


def _min_multiplicity_from(host: BratteliDiagram, n: int, v: str) -> int:
    mult = {w: 0 for w in host.vertices(n)}
    for e in host.out_edges(n - 1, v):
        mult[e.range] += 1
    return min(mult.values())


class _Placer:
    """Book-keeping for least-id placement of template pieces into a host."""

    def __init__(self, host: BratteliDiagram, rng: random.Random | None):
        self.host = host
        self.rng = rng
        self.used_v: list[set[str]] = [set() for _ in range(host.depth + 1)]
        self.used_e: list[set[str]] = [set() for _ in range(host.depth + 1)]

    def _order(self, items: list) -> list:
        if self.rng is not None:
            items = list(items)
            self.rng.shuffle(items)
        return items

    def free_edges(self, n: int, v: str, w: str) -> list[str]:
        return [e.id for e in self.host.out_edges(n - 1, v)
                if e.range == w and e.id not in self.used_e[n]]

    def place_vertex(self, n: int, needs: dict[str, int], what: str) -> str:
        """Least free vertex of V_n with at least needs[s] free edges from each s in V_{n-1}."""
        for c in self._order([v for v in self.host.vertices(n) if v not in self.used_v[n]]):
            if all(len(self.free_edges(n, s, c)) >= k for s, k in needs.items()):
                self.used_v[n].add(c)
                return c
        raise AbsorptionError(f"internal consistency: no admissible host vertex for {what} at level {n}")

    def take_edge(self, n: int, v: str, w: str) -> str:
        free = self._order(self.free_edges(n, v, w))
        if not free:
            raise AbsorptionError(f"internal consistency: no free edge {v}->{w} at level {n}")
        self.used_e[n].add(free[0])
        return free[0]

    def place_template_level(self, template: BratteliDiagram, l: int, n: int,
                             vmaps: list[dict[str, str]], emaps: list[dict[str, str]], what: str) -> None:
        """Place template level l at host level n, given placements of level l-1."""
        vmap: dict[str, str] = {}
        emap: dict[str, str] = {}
        for u in template.vertices(l):
            needs: dict[str, int] = {}
            for e in template.in_edges(l, u):
                src = vmaps[l - 1][e.source]
                needs[src] = needs.get(src, 0) + 1
            c = self.place_vertex(n, needs, what)
            vmap[u] = c
            for e in template.in_edges(l, u):
                emap[e.id] = self.take_edge(n, vmaps[l - 1][e.source], c)
        vmaps.append(vmap)
        emaps.append(emap)


def embed_template(host: BratteliDiagram, template: BratteliDiagram, depth: int | None = None,
                   seed: int | None = None) -> tuple[Subdiagram, Embedding]:
    """Draw levels 0..depth of `template` into `host` from the root, least ids first."""
    depth = host.depth if depth is None else depth
    if template.depth < depth:
        raise AbsorptionError(f"template depth {template.depth} below {depth}")
    placer = _Placer(host, random.Random(seed) if seed is not None else None)
    vmaps = [{template.root: host.root}]
    emaps: list[dict[str, str]] = [{}]
    for l in range(1, depth + 1):
        placer.place_template_level(template, l, l, vmaps, emaps, "the embedded template")
    emb = Embedding(0, tuple(vmaps), tuple(emaps))
    sub = Subdiagram(host, [set(emaps[l].values()) if l <= depth else set() for l in range(1, host.depth + 1)])
    return sub, emb


def identify_subdiagram(y_sub: Subdiagram, templates: Templates) -> Embedding:
    """A level-preserving identification of the template W (truncated) with y_sub."""
    depth = y_sub.depth
    w = truncate(templates.w, depth)
    iso = graded_isomorphism(w, y_sub.as_diagram())
    if iso is None:
        raise AbsorptionError("the subdiagram is not a copy of the template W")
    vmaps, emaps = iso
    return Embedding(0, tuple(vmaps), tuple(emaps))


@dataclass(frozen=True)
class AbsorptionScaffold:
    host: BratteliDiagram
    y_sub: Subdiagram
    y_embedding: Embedding
    templates: Templates
    spine: tuple[str, ...]
    replicas: tuple[Embedding, ...]
    l_sub: Subdiagram
    l_prime_sub: Subdiagram
    thinness: dict[str, Fraction] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return self.host.depth

    def spine_vertex(self, n: int) -> str:
        return self.host.root if n == 0 else self.host.edge(n, self.spine[n - 1]).range

    def replica(self, j: int) -> Embedding:
        """Replica j (1-based) hangs below t(e_j)."""
        return self.replicas[j - 1]

    def replica_sub(self, j: int) -> Subdiagram:
        levels: list[set[str]] = [set() for _ in range(self.depth)]
        for k in range(j):
            levels[k].add(self.spine[k])
        emb = self.replica(j) if j <= len(self.replicas) else None
        if emb is not None:
            for n in range(j + 1, self.depth + 1):
                levels[n - 1] |= emb.host_edges(n)
        return Subdiagram(self.host, levels)

    def replica_owner(self, n: int) -> dict[str, tuple[int, str]]:
        """Host vertices of level n inside a replica proper: v -> (j, W' vertex)."""
        owner = {}
        for j, emb in enumerate(self.replicas, start=1):
            l = n - j
            if 1 <= l <= emb.depth:
                for u, v in emb.vertex_maps[l].items():
                    owner[v] = (j, u)
        return owner

    def replica_edge_owner(self, n: int) -> dict[str, tuple[int, str]]:
        owner = {}
        for j, emb in enumerate(self.replicas, start=1):
            l = n - j
            if 1 <= l <= emb.depth:
                for u, v in emb.edge_maps[l].items():
                    owner[v] = (j, u)
        return owner


def plant_replicas(host: BratteliDiagram, y_sub: Subdiagram, templates: Templates,
                   seed: int | None = None) -> AbsorptionScaffold:
    """Choose the spine and plant a replica of W' below each spine vertex t(e_j), j < depth."""
    depth = host.depth
    capacity = check_capacity_conditions(host, y_sub, templates)
    if not capacity.ok:
        raise AbsorptionError(f"capacity failure: {capacity.summary()}")
    if any(y_sub.edge_ids(n) for n in range(1, depth + 1)):
        sub_report = validate_subdiagram(y_sub)
        if not sub_report.ok:
            raise AbsorptionError(f"Y is not a subdiagram: {sub_report.summary()}")
    y_embedding = identify_subdiagram(y_sub, templates)
    wprime = templates.w_prime
    placer = _Placer(host, random.Random(seed) if seed is not None else None)
    for n in range(1, depth + 1):
        placer.used_v[n] |= set(y_sub.vertices(n))
        placer.used_e[n] |= y_sub.edge_ids(n)
    spine: list[str] = []
    spine_vertices = [host.root]
    rep_v: list[list[dict[str, str]]] = []
    rep_e: list[list[dict[str, str]]] = []
    for n in range(1, depth + 1):
        v = placer.place_vertex(n, {spine_vertices[-1]: 1}, "the spine")
        spine.append(placer.take_edge(n, spine_vertices[-1], v))
        spine_vertices.append(v)
        for j in range(1, n):
            l = n - j
            if l <= wprime.depth:
                placer.place_template_level(wprime, l, n, rep_v[j - 1], rep_e[j - 1], f"replica {j}")
        if n < depth:
            rep_v.append([{wprime.root: v}])
            rep_e.append([{}])
    replicas = tuple(Embedding(j, tuple(vm), tuple(em)) for j, (vm, em) in enumerate(zip(rep_v, rep_e), start=1))
    prime_levels: list[set[str]] = [{spine[n - 1]} for n in range(1, depth + 1)]
    for emb in replicas:
        for n in range(1, depth + 1):
            prime_levels[n - 1] |= emb.host_edges(n)
    l_prime = Subdiagram(host, prime_levels)
    l_sub = l_prime.union(y_sub)
    thin = {"L": thinness_bound(l_sub, depth), "L'": thinness_bound(l_prime, depth)}
    scaffold = AbsorptionScaffold(host, y_sub, y_embedding, templates, tuple(spine), replicas,
                                  l_sub, l_prime, thin)
    report = check_scaffold(scaffold)
    if not report.ok:
        raise AbsorptionError(f"internal consistency: {report.summary()}")
    return scaffold


def check_scaffold(s: AbsorptionScaffold) -> ValidationReport:
    """Spine avoids W̃; W̃, the spine vertex and the replicas are disjoint per level; embeddings are honest."""
    report = ValidationReport()
    host = s.host
    if not host.is_path(s.spine):
        report.add("spine", "spine is not a root path")
        return report
    for n in range(1, s.depth + 1):
        y_vertices = set(s.y_sub.vertices(n))
        spine_v = s.spine_vertex(n)
        if spine_v in y_vertices:
            report.add("spine-avoids-y", "spine vertex lies in W̃", n, spine_v)
        groups = [("W̃", y_vertices), ("spine", {spine_v})]
        groups += [(f"replica {j}", s.replica(j).host_vertices(n)) for j in range(1, min(n, len(s.replicas) + 1))]
        seen: dict[str, str] = {}
        for name, vs in groups:
            for v in vs:
                if v in seen:
                    report.add("disjoint", f"vertex shared by {seen[v]} and {name}", n, v)
                seen[v] = name
    for j, emb in enumerate(s.replicas, start=1):
        if emb.vertex_maps[0][s.templates.w_prime.root] != s.spine_vertex(j):
            report.add("replica-root", f"replica {j} is not rooted at t(e_{j})", j)
        report.extend(_embedding_report(host, s.templates.w_prime, emb, f"replica {j}"))
    report.extend(_embedding_report(host, s.templates.w, s.y_embedding, "W̃"))
    for name, sub in (("L", s.l_sub), ("L'", s.l_prime_sub)):
        sub_report = validate_subdiagram(sub)
        for issue in sub_report.issues:
            report.add(issue.code, f"{name}: {issue.detail}", issue.level, issue.item, issue.severity)
    return report


def _embedding_report(host: BratteliDiagram, template: BratteliDiagram, emb: Embedding, name: str) -> ValidationReport:
    report = ValidationReport()
    for l in range(1, emb.depth + 1):
        n = emb.offset + l
        images = list(emb.edge_maps[l].values())
        if len(set(images)) != len(images):
            report.add("embedding", f"{name}: two template edges share a host edge", n)
        for e in template.edges(l):
            he = host.edge(n, emb.edge_maps[l][e.id])
            if he.source != emb.vertex_maps[l - 1][e.source] or he.range != emb.vertex_maps[l][e.range]:
                report.add("embedding", f"{name}: edge {e.id} is not drawn between its endpoint images", n)
        vimages = list(emb.vertex_maps[l].values())
        if len(set(vimages)) != len(vimages):
            report.add("embedding", f"{name}: two template vertices share a host vertex", n)
    return report


@dataclass(frozen=True)
class AbsorptionResult:
    scaffold: AbsorptionScaffold
    rewritten: BratteliDiagram
    quotient: DiagramQuotient
    replica_images: tuple[Embedding, ...]
    fibers: tuple[dict[str, list[str]], ...]

    @property
    def depth(self) -> int:
        return self.rewritten.depth

    def lifter(self) -> PathLifter:
        return PathLifter(self.quotient)


def build_absorption_diagram(scaffold: AbsorptionScaffold, check: bool = True,
                             cap: int = DEFAULT_ENUMERATION_CAP) -> AbsorptionResult:
    """Split replica vertices through q_W, turn replicas of W' into replicas of W, reroute the rest."""
    host, t = scaffold.host, scaffold.templates
    report = validate_quotient(t.quotient)
    if not report.ok:
        raise AbsorptionError(f"template quotient fails: {report.summary()}")
    depth = host.depth
    fibers: list[dict[str, list[str]]] = []
    by_w_vertex: list[dict[tuple[str, str], str]] = []
    vertices: list[list[str]] = []
    for n in range(depth + 1):
        owner = scaffold.replica_owner(n) if n >= 2 else {}
        level_fibers: dict[str, list[str]] = {}
        lookup: dict[tuple[str, str], str] = {}
        for v in host.vertices(n):
            if v in owner:
                j, u = owner[v]
                xs = t.vertex_fiber(n - j, u)
                ids = [v] if len(xs) == 1 else [f"{v}{SPLIT}{x}" for x in xs]
                for x, vid in zip(xs, ids):
                    lookup[(v, x)] = vid
                level_fibers[v] = ids
            else:
                level_fibers[v] = [v]
        fibers.append(level_fibers)
        by_w_vertex.append(lookup)
        vertices.append([vid for v in host.vertices(n) for vid in level_fibers[v]])

    edges: list[list[Edge]] = []
    vmaps = [{vid: v for v, ids in level.items() for vid in ids} for level in fibers]
    emaps: list[dict[str, str]] = [{}]
    image_emaps: list[list[dict[str, str]]] = [[{}] for _ in scaffold.replicas]
    for n in range(1, depth + 1):
        edge_owner = scaffold.replica_edge_owner(n)
        level: list[Edge] = []
        emap: dict[str, str] = {}
        free_count: dict[tuple[str, str], int] = {}
        for e in host.edges(n):
            if e.id not in edge_owner:
                free_count[(e.source, e.range)] = free_count.get((e.source, e.range), 0) + 1
        seen: dict[tuple[str, str], int] = {}
        for e in host.edges(n):
            src_fiber, dst_fiber = fibers[n - 1][e.source], fibers[n][e.range]
            if e.id in edge_owner:
                j, tid = edge_owner[e.id]
                l = n - j
                over = t.edge_fiber(l, tid)
                for eps in over:
                    src = e.source if l == 1 else by_w_vertex[n - 1][(e.source, eps.source)]
                    dst = by_w_vertex[n][(e.range, eps.range)] if len(dst_fiber) > 1 else e.range
                    eid = e.id if len(over) == 1 else f"{e.id}{SPLIT}{eps.id}"
                    level.append(Edge(eid, src, dst))
                    emap[eid] = e.id
                    maps = image_emaps[j - 1]
                    while len(maps) <= l:
                        maps.append({})
                    maps[l][eps.id] = eid
                continue
            key = (e.source, e.range)
            k = seen.get(key, 0)
            seen[key] = k + 1
            if len(dst_fiber) > 1 and free_count[key] < len(dst_fiber):
                raise AbsorptionError(
                    f"insufficient reroutable edges {e.source}->{e.range} at level {n}: "
                    f"{free_count[key]} < {len(dst_fiber)}")
            dst = dst_fiber[k % len(dst_fiber)]
            for src in src_fiber:
                eid = e.id if len(src_fiber) == 1 else f"{e.id}{SPLIT}{src.split(SPLIT, 1)[1]}"
                level.append(Edge(eid, src, dst))
                emap[eid] = e.id
        edges.append(level)
        emaps.append(emap)
    rewritten = BratteliDiagram(vertices, edges)
    quotient = DiagramQuotient(rewritten, host, tuple(vmaps), tuple(emaps), STRICT_SOURCE)

    images = []
    for j, emb in enumerate(scaffold.replicas, start=1):
        vm = [{t.w.root: scaffold.spine_vertex(j)}]
        for l in range(1, emb.depth + 1):
            n = j + l
            vm.append({x: (by_w_vertex[n][(emb.vertex_maps[l][u], x)]
                           if len(fibers[n][emb.vertex_maps[l][u]]) > 1 else emb.vertex_maps[l][u])
                       for u in t.w_prime.vertices(l) for x in t.vertex_fiber(l, u)})
        em = image_emaps[j - 1][: emb.depth + 1]
        while len(em) < emb.depth + 1:
            em.append({})
        images.append(Embedding(j, tuple(vm), tuple(em)))
    result = AbsorptionResult(scaffold, rewritten, quotient, tuple(images), tuple(fibers))
    if check:
        report = check_absorption(result, cap)
        if not report.ok:
            raise AbsorptionError(f"rewritten diagram fails: {report.summary()}")
    return result


def check_absorption(result: AbsorptionResult, cap: int = DEFAULT_ENUMERATION_CAP) -> ValidationReport:
    """Validators on the rewrite: diagram, simplicity, quotient (i)+(ii), fiber law, lift bijectivity."""
    report = ValidationReport()
    s, t = result.scaffold, result.scaffold.templates
    report.extend(validate_diagram(result.rewritten))
    windows = simplicity_window(result.rewritten)
    if not windows.ok:
        report.add("simple", f"no simplicity window at levels {list(windows.failures)}")
    report.extend(validate_quotient(result.quotient))
    for n in range(result.depth + 1):
        owner = s.replica_owner(n) if n >= 2 else {}
        for v in s.host.vertices(n):
            size = len(result.fibers[n][v])
            expected = len(t.vertex_fiber(n - owner[v][0], owner[v][1])) if v in owner else 1
            if size != expected:
                report.add("fiber-law", f"fiber of size {size}, expected {expected}", n, v)
    if report.ok:
        report.extend(lift_bijection_report(result.quotient, cap))
    return report


def lift_bijection_report(q: DiagramQuotient, cap: int = DEFAULT_ENUMERATION_CAP) -> ValidationReport:
    """Path maps of every depth are bijections.

    Depths whose path count is within `cap` are checked exhaustively; deeper
    ones follow from the source-fiber bijections already validated, and are
    confirmed by equal path totals.
    """
    report = ValidationReport()
    src_counts, dst_counts = all_path_counts(q.source), all_path_counts(q.target)
    for n in range(q.source.depth + 1):
        a, b = sum(src_counts[n].values()), sum(dst_counts[n].values())
        if a != b:
            report.add("lift-count", f"{a} source paths vs {b} target paths", n)
            continue
        if b <= cap:
            try:
                lift_paths(q, n, cap)
            except DiagramError as exc:
                report.add("lift", str(exc), n)
        else:
            for w in q.target.vertices(n):
                fiber_total = sum(src_counts[n][v] for v, img in q.vertex_maps[n].items() if img == w)
                if fiber_total != dst_counts[n][w]:
                    report.add("lift-count", f"{fiber_total} lifted paths over {w} vs {dst_counts[n][w]}", n, w)
    return report


def exhaustive_lift_check(q: DiagramQuotient, n: int, budget: int = 20_000_000) -> bool:
    """Exhaustive bijectivity of p -> q_E(p) at depth n without storing path tuples.

    Target paths ending at w are numbered 0..count(w)-1 by (incoming edge,
    number of the prefix).  Every source path is pushed forward and its
    target number recorded; the map is a bijection iff each target vertex
    receives every number exactly once.
    """
    src, dst = q.source, q.target
    dst_counts = all_path_counts(dst)
    total = sum(dst_counts[n].values())
    if total > budget:
        raise RuntimeError(f"{total} paths exceed the budget {budget}")
    offset: list[dict[str, int]] = [{}]
    for k in range(1, n + 1):
        running: dict[str, int] = {}
        table = {}
        for e in dst.edges(k):
            table[e.id] = running.get(e.range, 0)
            running[e.range] = table[e.id] + dst_counts[k - 1][e.source]
        offset.append(table)
    # frontier: per source vertex, the list of target numbers of the paths reaching it
    frontier: dict[str, list[int]] = {src.root: [0]}
    for k in range(1, n + 1):
        nxt: dict[str, list[int]] = {}
        emap = q.edge_maps[k]
        for v, numbers in frontier.items():
            for e in src.out_edges(k - 1, v):
                image = dst.edge(k, emap[e.id])
                if image.source != q.vertex_maps[k - 1][v] or image.range != q.vertex_maps[k][e.range]:
                    return False
                base = offset[k][image.id]
                nxt.setdefault(e.range, []).extend(base + x for x in numbers)
        frontier = nxt
    received: dict[str, list[int]] = {}
    for v, numbers in frontier.items():
        received.setdefault(q.vertex_maps[n][v], []).extend(numbers)
    for w in dst.vertices(n):
        got = received.get(w, [])
        if len(got) != dst_counts[n][w] or len(set(got)) != len(got):
            return False
        if got and (min(got) != 0 or max(got) != dst_counts[n][w] - 1):
            return False
    return True


# ---------------------------------------------------------------- shift map


def _template_paths(d: BratteliDiagram, length: int) -> list[Path]:
    return enumerate_paths(truncate(d, length), length) if length <= d.depth else []


@dataclass(frozen=True)
class ShiftMap:
    """α at truncation depth N: depth N-1 paths of Z to depth N paths of Z' (in the rewritten diagram)."""

    depth: int
    forward: dict[Path, Path]
    y_paths: tuple[Path, ...]
    report: ValidationReport

    @property
    def ok(self) -> bool:
        return self.report.ok


def shift_map_alpha(result: AbsorptionResult, depth: int | None = None) -> ShiftMap:
    """Y -> replica 1, replica j -> replica j+1, spine fixed; checked against K and the replica relations."""
    s, t = result.scaffold, result.scaffold.templates
    N = result.depth if depth is None else depth
    if N < 2 or N > result.depth:
        raise AbsorptionError(f"depth {N} too small to contain replica 1 (need 2..{result.depth})")
    report = ValidationReport()
    y_emb = s.y_embedding
    forward: dict[Path, Path] = {}
    replica_image = {j: emb for j, emb in enumerate(result.replica_images, start=1)}

    def replica_path(j: int, w_path: Sequence[str]) -> Path:
        return tuple(s.spine[:j]) + replica_image[j].path(w_path) if w_path else tuple(s.spine[:j])

    y_paths = tuple(y_emb.path(p) for p in _template_paths(t.w, N - 1))
    for wp in _template_paths(t.w, N - 1):
        forward[y_emb.path(wp)] = replica_path(1, wp)
    for j in range(1, N - 1):
        for wp in _template_paths(t.w, N - 1 - j):
            forward[replica_path(j, wp)] = replica_path(j + 1, wp)
    forward[tuple(s.spine[: N - 1])] = tuple(s.spine[:N])

    z_prime = {replica_path(j, wp) for j in range(1, N) for wp in _template_paths(t.w, N - j)}
    z_prime.add(tuple(s.spine[:N]))
    images = list(forward.values())
    if len(set(images)) != len(images):
        report.add("alpha-injective", "two paths share an image")
    if set(images) != z_prime:
        report.add("alpha-onto", f"image has {len(set(images))} of {len(z_prime)} paths")
    if forward.get(tuple(s.spine[: N - 1])) != tuple(s.spine[:N]):
        report.add("alpha-spine", "spine prefix is not fixed")
    V = result.rewritten
    for p in list(forward) + images:
        if not V.is_path(p):
            report.add("alpha-paths", f"{p} is not a path of the rewritten diagram")
            break
    if report.ok:
        report.extend(_alpha_relations(result, forward, N))
    return ShiftMap(N, forward, y_paths, report)


def _alpha_relations(result: AbsorptionResult, forward: dict[Path, Path], N: int) -> ValidationReport:
    """h = H̄∘α∘H̄⁻¹ carries K to K_1, K_j to K_{j+1}, and R|_Y ∨ K onto R restricted to replica 1."""
    report = ValidationReport()
    s, t = result.scaffold, result.scaffold.templates
    host = s.host
    q = result.quotient
    h = {q.map_path(a): q.map_path(b) for a, b in forward.items()}

    def pairs(groups: dict) -> set[frozenset]:
        return {frozenset((a, b)) for g in groups.values() for a in g for b in g if a != b}

    k_groups: dict = {}
    for wp in _template_paths(t.w, N - 1):
        k_groups.setdefault(t.k_key(wp), []).append(s.y_embedding.path(wp))
    k_pairs = pairs(k_groups)
    moved = {frozenset(h[x] for x in pair) for pair in k_pairs}
    if moved != replica_pairs(s, 1, N):
        report.add("alpha-k", "h×h(K) differs from K_1")
    for j in range(1, N - 1):
        moved = {frozenset(h[x] for x in pair) for pair in replica_pairs(s, j, N - 1)}
        if moved != replica_pairs(s, j + 1, N):
            report.add("alpha-kj", f"h×h(K_{j}) differs from K_{j + 1}")
    uf = UnionFind([s.y_embedding.path(wp) for wp in _template_paths(t.w, N - 1)])
    by_end: dict = {}
    for p in uf:
        by_end.setdefault(host.path_range(p), []).append(p)
    for group in list(by_end.values()) + list(k_groups.values()):
        uf.union(*group)
    joined = {frozenset(h[p] for p in c) for c in uf.to_sets()}
    replica_one = [tuple(s.spine[:1]) + s.replica(1).path(wp) for wp in _template_paths(t.w_prime, N - 1)]
    terminal: dict = {}
    for p in replica_one:
        terminal.setdefault(host.path_range(p), set()).add(p)
    if joined != {frozenset(c) for c in terminal.values()}:
        report.add("alpha-restricted", "R|_Y ∨ K is not carried onto R restricted to replica 1")
    return report


def replica_pairs(s: AbsorptionScaffold, j: int, N: int) -> set[frozenset]:
    """K_j on host paths of depth N: replica-j paths agreeing from level j+1 on the template."""
    groups: dict = {}
    wprime = s.templates.w_prime
    if j > len(s.replicas) or N - j < 1:
        return set()
    emb = s.replica(j)
    for wp in _template_paths(wprime, N - j):
        key = (wprime.edge(1, wp[0]).range, wp[1:])
        groups.setdefault(key, []).append(tuple(s.spine[:j]) + emb.path(wp))
    return {frozenset((a, b)) for g in groups.values() for a in g for b in g if a != b}


# ------------------------------------------------------------ star identities


@dataclass
class StarReport:
    """Outcome of checking R = R̄ ∨ K_1 ∨ ... (and with K) at cofinality level n, depth N."""

    n: int
    depth: int
    with_k: bool
    sound: bool
    complete: bool
    unreached: list[tuple[Path, Path]] = field(default_factory=list)
    classes: int = 0

    @property
    def ok(self) -> bool:
        return self.sound and self.complete


def _k_groups_terminals(result: AbsorptionResult, N: int, omit: Iterable[int], with_k: bool) -> list[list[str]]:
    """Groups of rewritten-terminal vertices that the replica relations (and K) merge."""
    s, t = result.scaffold, result.scaffold.templates
    lifter = result.lifter()
    omit = set(omit)
    groups: list[list[str]] = []
    for j in range(1, min(N, len(s.replicas) + 1)):
        if j in omit:
            continue
        by_key: dict = {}
        emb = s.replica(j)
        for wp in _template_paths(t.w_prime, N - j):
            p = tuple(s.spine[:j]) + emb.path(wp)
            by_key.setdefault((t.w_prime.edge(1, wp[0]).range, wp[1:]), []).append(lifter.lift_end(p))
        groups.extend(g for g in by_key.values() if len(g) > 1)
    if with_k:
        by_key = {}
        for wp in _template_paths(t.w, N):
            by_key.setdefault(t.k_key(wp), []).append(s.host.path_range(s.y_embedding.path(wp)))
        groups.extend(g for g in by_key.values() if len(g) > 1)
    return groups


def verify_star(result: AbsorptionResult, n: int, depth: int | None = None,
                omit: Iterable[int] = (), with_k: bool = False) -> StarReport:
    """Exact check of the star identity at depth N without enumerating host paths.

    Closure classes are unions of rewritten terminal vertices, merged by the
    replica relations.  Completeness at level n is decided by pushing pairs
    of fiber vertices over a common host vertex of level n along every host
    edge and testing the pairs that survive to level N.
    """
    s = result.scaffold
    N = result.depth if depth is None else depth
    if not 0 <= n < N <= result.depth:
        raise AbsorptionError(f"need 0 <= n < N <= {result.depth}, got n={n}, N={N}")
    V = result.rewritten
    q = result.quotient
    lifter = result.lifter()
    uf = UnionFind(V.vertices(N))
    for g in _k_groups_terminals(result, N, omit, with_k):
        uf.union(*g)
    classes = list(uf.to_sets())
    host_uf = UnionFind(s.host.vertices(N))
    if with_k:
        for g in _k_groups_terminals(result, N, range(1, N), True):
            host_uf.union(*(q.vertex_maps[N].get(x, x) for x in g))
    sound = all(len({host_uf[q.vertex_maps[N][x]] for x in c}) == 1 for c in classes)

    # pairs of distinct rewritten vertices over one host vertex, with a back-pointer for witnesses
    frontier: dict[frozenset, tuple] = {}
    for v in s.host.vertices(n):
        fib = result.fibers[n][v]
        for i, a in enumerate(fib):
            for b in fib[i + 1:]:
                frontier[frozenset((a, b))] = (v, ())
    for k in range(n + 1, N + 1):
        nxt: dict[frozenset, tuple] = {}
        for pair, (v, tail) in frontier.items():
            a, b = sorted(pair)
            for e in s.host.out_edges(k - 1, q.vertex_maps[k - 1][a]):
                ea, eb = lifter.step(k, a, e.id).range, lifter.step(k, b, e.id).range
                if ea != eb:
                    key = frozenset((ea, eb))
                    if key not in nxt:
                        nxt[key] = (v, tail + (e.id,))
        frontier = nxt
    unreached = []
    for pair, (v, tail) in frontier.items():
        a, b = sorted(pair)
        if uf[a] != uf[b]:
            unreached.append(_witness(result, n, pair, v, tail, N))
    return StarReport(n, N, with_k, sound, not unreached, unreached[:5], len(classes))


def _witness(result: AbsorptionResult, n: int, final_pair: frozenset, v: str, tail: Path, N: int) -> tuple[Path, Path]:
    """Two host paths cofinal from level n whose rewritten terminals stay apart."""
    V, q = result.rewritten, result.quotient
    lifter = result.lifter()
    for a in result.fibers[n][v]:
        for b in result.fibers[n][v]:
            if a >= b:
                continue
            ends = {lifter.lift_end(tail, n, a), lifter.lift_end(tail, n, b)}
            if ends == set(final_pair):
                return (q.map_path(_some_path_to(V, n, a)) + tail, q.map_path(_some_path_to(V, n, b)) + tail)
    return ((), ())


def _some_path_to(V: BratteliDiagram, n: int, v: str) -> Path:
    path: list[str] = []
    current = v
    for k in range(n, 0, -1):
        e = V.in_edges(k, current)[0]
        path.append(e.id)
        current = e.source
    return tuple(reversed(path))


def star_margin(result: AbsorptionResult, depth: int | None = None, with_k: bool = False) -> int:
    """Largest n < N for which completeness holds at every level up to n (-1 if none)."""
    N = result.depth if depth is None else depth
    best = -1
    for n in range(N):
        if not verify_star(result, n, N, with_k=with_k).complete:
            break
        best = n
    return best


def verify_star_bruteforce(result: AbsorptionResult, n: int, depth: int | None = None,
                           omit: Iterable[int] = (), with_k: bool = False,
                           cap: int = DEFAULT_ENUMERATION_CAP) -> StarReport:
    """Reference implementation: explicit host paths, explicit pairs, union-find over paths."""
    s, t = result.scaffold, result.scaffold.templates
    host = s.host
    N = result.depth if depth is None else depth
    paths = enumerate_paths(host, N, cap)
    lifter = result.lifter()
    uf = UnionFind(paths)
    by_lift: dict = {}
    for p in paths:
        by_lift.setdefault(lifter.lift_end(p), []).append(p)
    for g in by_lift.values():
        uf.union(*g)
    omit = set(omit)
    for j in range(1, N):
        if j in omit:
            continue
        for pair in replica_pairs(s, j, N):
            uf.union(*pair)
    k_pairs = []
    if with_k:
        groups: dict = {}
        for wp in _template_paths(t.w, N):
            groups.setdefault(t.k_key(wp), []).append(s.y_embedding.path(wp))
        for g in groups.values():
            uf.union(*g)
            k_pairs.extend((a, b) for a in g for b in g)
    target = UnionFind(paths)
    by_end: dict = {}
    for p in paths:
        by_end.setdefault(host.path_range(p), []).append(p)
    for g in by_end.values():
        target.union(*g)
    for a, b in k_pairs:
        target.union(a, b)
    classes = list(uf.to_sets())
    sound = all(len({target[p] for p in c}) == 1 for c in classes)
    unreached = []
    cofinal: dict = {}
    for p in paths:
        cofinal.setdefault(p[n:], []).append(p)
    for g in cofinal.values():
        root = uf[g[0]]
        for p in g[1:]:
            if uf[p] != root:
                unreached.append((g[0], p))
                break
    return StarReport(n, N, with_k, sound, not unreached, unreached[:5], len(classes))
