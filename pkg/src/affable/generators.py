"""Seeded random instances for property tests, acceptance runs and fuzzing.

Every generator takes a `random.Random` so results are reproducible.
"""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from affable.absorption import Templates, capacity_request_for, embed_template
from affable.afstructure import transverse_diagrams
from affable.diagram import BratteliDiagram, Edge, Subdiagram, validate_diagram
from affable.relations import FiniteEqRel, relation_from_group_action

ROOT = "v0"


def random_diagram(rng: random.Random, depth: int, max_width: int = 3, max_multiplicity: int = 2) -> BratteliDiagram:
    """A valid diagram with random sparse incidence (every vertex has an in-edge and an out-edge)."""
    vertices = [[ROOT]] + [[f"r{n}_{i}" for i in range(rng.randint(1, max_width))] for n in range(1, depth + 1)]
    edges = []
    for n in range(1, depth + 1):
        pairs = set()
        for w in vertices[n]:
            pairs.add((rng.choice(vertices[n - 1]), w))
        for v in vertices[n - 1]:
            pairs.add((v, rng.choice(vertices[n])))
        for v in vertices[n - 1]:
            for w in vertices[n]:
                if rng.random() < 0.3:
                    pairs.add((v, w))
        level = []
        for v, w in sorted(pairs):
            for m in range(rng.randint(1, max_multiplicity)):
                level.append(Edge(f"{v}-{w}-{m}", v, w))
        edges.append(level)
    d = BratteliDiagram(vertices, edges)
    assert validate_diagram(d).ok
    return d


def layered_host(rng: random.Random, sizes: Sequence[int], multiplicities: Sequence[int],
                 extra_multiplicity: int = 0) -> BratteliDiagram:
    """Complete bipartite layers: #V_n = sizes[n-1], each pair joined by at least multiplicities[n-1] edges."""
    vertices = [[ROOT]] + [[f"h{n}_{i}" for i in range(size)] for n, size in enumerate(sizes, start=1)]
    edges = []
    for n in range(1, len(sizes) + 1):
        level = []
        for i, v in enumerate(vertices[n - 1]):
            for j, w in enumerate(vertices[n]):
                for m in range(multiplicities[n - 1] + rng.randint(0, extra_multiplicity)):
                    level.append(Edge(f"g{n}_{i}_{j}_{m}", v, w))
        edges.append(level)
    return BratteliDiagram(vertices, edges)


def random_chain(rng: random.Random, points: Sequence, length: int) -> list[FiniteEqRel]:
    """R_0 = Δ ⊆ R_1 ⊆ ... with `length` members, each a random coarsening of the previous."""
    points = tuple(points)
    chain = [FiniteEqRel.identity(points)]
    while len(chain) < length:
        classes = [list(c) for c in chain[-1].classes]
        if len(classes) > 1 and rng.random() < 0.6:
            i, j = rng.sample(range(len(classes)), 2)
            classes[i] += classes[j]
            del classes[j]
        chain.append(FiniteEqRel(points, classes))
    return chain


def _cycles_permutation(items: Sequence, cycle: int) -> dict:
    """Permutation of `items` made of consecutive blocks of length `cycle`."""
    perm = {}
    for start in range(0, len(items), cycle):
        block = items[start:start + cycle]
        for k, x in enumerate(block):
            perm[x] = block[(k + 1) % len(block)]
    return perm


def random_free_actions(rng: random.Random, max_points: int = 16) -> tuple[tuple[int, ...], dict, dict]:
    """Points and two commuting generators whose joint action is free.

    X = A × B, the first generator rotates A in cycles of length k1, the
    second applies a power of it on A and rotates B in cycles of length k2;
    the power is chosen so that the joint action stays free.
    """
    while True:
        k1, r1, k2, r2 = rng.randint(1, 4), rng.randint(1, 2), rng.randint(1, 4), rng.randint(1, 2)
        if k1 * r1 * k2 * r2 <= max_points and k1 * r1 * k2 * r2 >= 2:
            break
    a_items = list(range(k1 * r1))
    b_items = list(range(k2 * r2))
    rho = _cycles_permutation(a_items, k1)
    tau = _cycles_permutation(b_items, k2)
    powers = [m for m in range(k1) if (k1 // _gcd(m, k1)) and k2 % (k1 // _gcd(m, k1)) == 0]
    m = rng.choice(powers)
    rho_m = {a: _power(rho, a, m) for a in a_items}
    grid = list(itertools.product(a_items, b_items))
    labels = list(range(1, len(grid) + 1))
    rng.shuffle(labels)
    name = dict(zip(grid, labels))
    gen_r = {name[(a, b)]: name[(rho[a], b)] for a, b in grid}
    gen_s = {name[(a, b)]: name[(rho_m[a], tau[b])] for a, b in grid}
    return tuple(sorted(labels)), gen_r, gen_s


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _power(perm: dict, x, m: int):
    for _ in range(m):
        x = perm[x]
    return x


def random_transverse_pair(rng: random.Random, max_points: int = 16) -> tuple[FiniteEqRel, FiniteEqRel]:
    """Orbit relations of two commuting free actions: always transverse."""
    points, gen_r, gen_s = random_free_actions(rng, max_points)
    return relation_from_group_action(points, [gen_r]), relation_from_group_action(points, [gen_s])


def break_transversality(rng: random.Random, r: FiniteEqRel, s: FiniteEqRel) -> FiniteEqRel:
    """A variant of S that fails transversality against a nontrivial R.

    Either an R-pair is added to S (so R ∩ S ≠ Δ) or an S-class is split
    (so S-class sizes differ along an R-class).
    """
    pairs = [(x, y) for x, y in r.pairs() if x != y]
    if not pairs:
        raise ValueError("R is the diagonal; every S is transverse to it")
    big = [c for c in s.classes if len(c) > 1]
    if big and rng.random() < 0.5:
        target = rng.choice(big)
        cut = rng.randint(1, len(target) - 1)
        classes = [c for c in s.classes if c != target] + [target[:cut], target[cut:]]
        return FiniteEqRel(s.points, classes)
    x, y = rng.choice(pairs)
    return FiniteEqRel.from_pairs(s.points, list(s.pairs()) + [(x, y)])


def random_transverse_instance(rng: random.Random, max_points: int, depth: int) -> tuple[tuple, list[FiniteEqRel], FiniteEqRel]:
    """Points, a chain of depth+1 relations and S with the top of the chain transverse to S.

    X = A × B; the chain is (random nested partitions of A) × Δ_B and S is
    the orbit relation of (σ, τ) with τ a free rotation of B and σ either the
    identity or an involution permuting the top classes of A.
    """
    while True:
        na, nb = rng.randint(1, 3), rng.choice([1, 2, 2, 3])
        if 2 <= na * nb <= max_points:
            break
    a_items = list(range(na))
    b_items = list(range(nb))
    a_chain = random_chain(rng, a_items, depth + 1)
    tau = _cycles_permutation(b_items, nb)
    sigma = {a: a for a in a_items}
    top = a_chain[-1]
    if nb % 2 == 0:
        same_size = [(c, d) for c, d in itertools.combinations(top.classes, 2) if len(c) == len(d)]
        if same_size and rng.random() < 0.5:
            c, d = rng.choice(same_size)
            for x, y in zip(c, d):
                sigma[x], sigma[y] = y, x
    grid = list(itertools.product(a_items, b_items))
    labels = list(range(1, len(grid) + 1))
    rng.shuffle(labels)
    name = dict(zip(grid, labels))
    points = tuple(sorted(labels))
    chain = [FiniteEqRel.from_labels(points, {name[(a, b)]: (rel.class_index(a), b) for a, b in grid})
             for rel in a_chain]
    s = relation_from_group_action(points, [{name[(a, b)]: name[(sigma[a], tau[b])] for a, b in grid}])
    return points, chain, s


def random_templates(rng: random.Random, depth: int, max_points: int = 4) -> Templates:
    points, chain, s = random_transverse_instance(rng, max_points, depth)
    return Templates(transverse_diagrams(points, chain, s).quotient).restricted(depth)


def random_absorption_instance(rng: random.Random, depth: int, max_points: int = 4,
                               slack: int = 2) -> tuple[BratteliDiagram, Subdiagram, Templates]:
    """Templates, a layered host meeting their capacity request, and an embedded copy of W."""
    templates = random_templates(rng, depth, max_points)
    a, b = capacity_request_for(templates, depth)
    sizes = [x + rng.randint(0, slack) for x in a]
    host = layered_host(rng, sizes, b, extra_multiplicity=1)
    y_sub, _ = embed_template(host, templates.w, depth, seed=rng.randrange(2**31))
    return host, y_sub, templates
