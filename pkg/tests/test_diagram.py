import random
from collections import Counter
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from affable.diagram import (
    BratteliDiagram,
    DiagramError,
    DiagramQuotient,
    Edge,
    EnumerationCapExceeded,
    PathLifter,
    STRICT_FULL,
    Subdiagram,
    count_paths,
    diagrams_isomorphic,
    enumerate_paths,
    graded_isomorphism,
    identity_matrix,
    incidence_matrix,
    lift_paths,
    matmul,
    path_count_matrix,
    relabel,
    truncate,
    validate_diagram,
    validate_quotient,
    validate_subdiagram,
)
from affable.fixtures import branch_collapse, complete_stationary, loop_then_chain, odometer, two_branch_tree
from affable.generators import random_diagram
from affable.transforms import telescope

seeds = st.integers(min_value=0, max_value=10**6)


def brute_paths(d: BratteliDiagram, n: int) -> list[tuple[str, ...]]:
    """Every edge sequence of length n, filtered by adjacency: an oracle independent of the DFS."""
    import itertools
    if n == 0:
        return [()]
    out = []
    for combo in itertools.product(*[d.edges(k) for k in range(1, n + 1)]):
        if combo[0].source == d.root and all(a.range == b.source for a, b in zip(combo, combo[1:])):
            out.append(tuple(e.id for e in combo))
    return sorted(out)


class TestValidation:
    def test_tree_and_odometer_are_valid(self, tree2, odo2):
        assert validate_diagram(tree2).ok
        assert validate_diagram(odo2).ok

    def test_isolated_vertex_reported_at_its_level(self):
        d = BratteliDiagram(
            [["v0"], ["a"], ["b", "lonely"]],
            [[Edge("e1", "v0", "a")], [Edge("e2", "a", "b")]],
        )
        report = validate_diagram(d)
        assert not report.ok
        assert any(i.code == "no-in-edge" and i.level == 2 and i.item == "lonely" for i in report.errors)

    def test_dead_end_below_last_level(self):
        d = BratteliDiagram([["v0"], ["a", "b"], ["c"]],
                            [[Edge("e", "v0", "a"), Edge("f", "v0", "b")], [Edge("g", "a", "c")]])
        assert "no-out-edge" in validate_diagram(d).codes()

    def test_level_zero_must_be_single(self):
        assert "root" in validate_diagram(BratteliDiagram([["v0", "w0"]], [])).codes()

    def test_edge_to_unknown_vertex_rejected(self):
        with pytest.raises(DiagramError):
            BratteliDiagram([["v0"], ["a"]], [[Edge("e", "v0", "zz")]])


class TestCounting:
    def test_incidence_examples(self, tree2):
        assert incidence_matrix(odometer(3), 1) == [[2]]
        assert incidence_matrix(tree2, 1) == [[1, 1]]

    def test_telescoped_incidence_matches_enumeration(self):
        d = odometer(2)
        t, _ = telescope(d, [0, 2])
        assert incidence_matrix(t, 1) == [[len(brute_paths(d, 2))]] == [[4]]

    def test_count_examples(self, tree2):
        assert count_paths(odometer(3), 3).total() == 8
        assert count_paths(tree2, 3).counts == {"x3": 1, "y3": 1}
        assert count_paths(loop_then_chain(3), 3).total() == 2

    def test_enumerate_examples(self):
        assert enumerate_paths(odometer(2), 2) == [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]
        assert enumerate_paths(odometer(4), 0) == [()]

    def test_cap_is_enforced(self):
        with pytest.raises(EnumerationCapExceeded):
            enumerate_paths(odometer(12), 12, cap=1000)

    def test_out_of_range_levels(self):
        d = odometer(2)
        with pytest.raises(DiagramError):
            incidence_matrix(d, 3)
        with pytest.raises(DiagramError):
            count_paths(d, 5)

    @given(seeds)
    def test_counts_match_brute_force(self, seed):
        d = random_diagram(random.Random(seed), depth=3)
        for n in range(d.depth + 1):
            paths = brute_paths(d, n)
            assert enumerate_paths(d, n) == paths
            assert Counter(d.path_range(p) for p in paths) == Counter(
                {v: c for v, c in count_paths(d, n).counts.items() if c})

    @given(seeds)
    def test_incidence_products_give_counts(self, seed):
        d = random_diagram(random.Random(seed), depth=4)
        row = [[1]]
        for n in range(1, d.depth + 1):
            row = matmul(row, incidence_matrix(d, n))
            assert row[0] == [count_paths(d, n)[v] for v in d.vertices(n)]
        assert path_count_matrix(d, 2, 2) == identity_matrix(len(d.vertices(2)))
        assert path_count_matrix(d, 1, 3) == matmul(incidence_matrix(d, 2), incidence_matrix(d, 3))


class TestSubdiagram:
    def test_tree_inside_a_host(self):
        host = complete_stationary(3, 2)
        sub = Subdiagram.from_paths(host, [("u0_0", "u0u0_0", "u0u0_0"), ("u1_0", "u1u1_0", "u1u1_0")])
        assert validate_subdiagram(sub).ok
        assert diagrams_isomorphic(sub.as_diagram(), two_branch_tree(3))

    def test_dropping_one_branch_edge_breaks_it(self):
        host = two_branch_tree(3)
        sub = Subdiagram(host, [["ex1", "ey1"], ["ex2"], ["ex3"]])
        report = validate_subdiagram(sub)
        assert any(i.code == "dead-end" and i.level == 1 and i.item == "y1" for i in report.errors)

    def test_empty_edge_set(self):
        assert not validate_subdiagram(Subdiagram(odometer(2), [[], []])).ok
        assert validate_subdiagram(Subdiagram(odometer(0), [])).ok

    def test_unknown_edge(self):
        with pytest.raises(DiagramError):
            Subdiagram(odometer(2), [["zz"], []])


class TestQuotient:
    def test_branch_collapse_full_strictness(self, q2):
        report = validate_quotient(q2)
        assert report.ok
        # range fibers at level 1 are informational only
        assert {i.level for i in report.issues if i.code == "range-fiber"} <= {1}

    def test_merged_loop_edges_break_source_fibers(self, q2):
        emaps = list(q2.edge_maps)
        emaps[1] = {"ex1": "l1", "ey1": "l1"}
        report = validate_quotient(replace(q2, edge_maps=tuple(emaps)))
        assert any(i.code == "source-fiber" and i.level == 0 and i.item == "v0" for i in report.errors)

    def test_identity_quotient(self, odo2, tree2):
        assert validate_quotient(DiagramQuotient.identity(odo2)).ok
        assert validate_quotient(DiagramQuotient.identity(tree2, STRICT_FULL)).ok
        # two parallel root edges share a range, which full strictness forbids
        assert "t-injective" in validate_quotient(DiagramQuotient.identity(odo2, STRICT_FULL)).codes()

    def test_depth_mismatch(self):
        q = branch_collapse(3)
        with pytest.raises(DiagramError):
            validate_quotient(replace(q, target=loop_then_chain(2)))

    def test_lift_branch_collapse(self):
        q = branch_collapse(3)
        bij = lift_paths(q, 3)
        assert len(bij.forward) == 2
        assert set(bij.forward.values()) == set(enumerate_paths(q.target, 3))
        lifter = PathLifter(q)
        for p, image in bij.forward.items():
            assert lifter.lift(image) == p

    def test_lift_identity(self, odo2):
        bij = lift_paths(DiagramQuotient.identity(odo2), 4)
        assert all(k == v for k, v in bij.forward.items())

    def test_lift_fails_without_source_fibers(self, q2):
        emaps = list(q2.edge_maps)
        emaps[1] = {"ex1": "l1", "ey1": "l1"}
        with pytest.raises(DiagramError):
            lift_paths(replace(q2, edge_maps=tuple(emaps)), 2)


class TestIsomorphism:
    @given(seeds)
    def test_relabel_is_isomorphic(self, seed):
        d = random_diagram(random.Random(seed), depth=3)
        r = relabel(d)
        iso = graded_isomorphism(d, r)
        assert iso is not None
        vmaps, emaps = iso
        for n in range(1, d.depth + 1):
            for e in d.edges(n):
                image = r.edge(n, emaps[n][e.id])
                assert (image.source, image.range) == (vmaps[n - 1][e.source], vmaps[n][e.range])

    def test_tree_is_not_loop(self):
        assert not diagrams_isomorphic(two_branch_tree(3), loop_then_chain(3))
        assert graded_isomorphism(two_branch_tree(3), loop_then_chain(3)) is None

    def test_truncate(self, odo2):
        assert truncate(odo2, 2) == odometer(2)
