import random

import pytest
from hypothesis import given, strategies as st

from affable.afstructure import (
    af_classes_at,
    check_transverse_build,
    diagram_from_filtration,
    height_recursion_report,
    round_trip_report,
    transverse_diagrams,
)
from affable.diagram import (
    DiagramQuotient,
    diagrams_isomorphic,
    enumerate_paths,
    graded_isomorphism,
    incidence_matrix,
    validate_quotient,
)
from affable.fixtures import loop_then_chain, odometer, two_branch_tree
from affable.generators import random_chain, random_transverse_instance
from affable.relations import FiniteEqRel, RelationError, permutation_from_cycles, relation_from_group_action

seeds = st.integers(min_value=0, max_value=10**6)
X4 = (1, 2, 3, 4)
X8 = tuple(range(1, 9))


def sizes(classes):
    return sorted(len(c) for c in classes)


class TestTruncatedClasses:
    def test_odometer_levels(self):
        d = odometer(3)
        assert sizes(af_classes_at(d, 0, 3)) == [1] * 8
        assert sizes(af_classes_at(d, 1, 3)) == [2] * 4
        assert sizes(af_classes_at(d, 3, 3)) == [8]

    def test_classes_agree_after_the_level(self):
        for c in af_classes_at(odometer(4), 2, 4):
            assert len({p[2:] for p in c}) == 1

    def test_bad_levels(self):
        with pytest.raises(ValueError):
            af_classes_at(odometer(3), 2, 1)
        with pytest.raises(ValueError):
            af_classes_at(odometer(3), 0, 4)

    @given(seeds)
    def test_nested_and_sized_by_counts(self, seed):
        from affable.generators import random_diagram
        d = random_diagram(random.Random(seed), depth=4)
        previous = None
        for n in range(d.depth + 1):
            classes = {frozenset(c) for c in af_classes_at(d, n, d.depth)}
            if previous is not None:
                assert all(any(c <= bigger for bigger in classes) for c in previous)
            previous = classes


class TestFiltration:
    def test_four_points(self):
        chain = [FiniteEqRel.identity(X4), FiniteEqRel(X4, [[1, 2], [3, 4]]), FiniteEqRel.full(X4)]
        fd = diagram_from_filtration(X4, chain)
        d = fd.diagram
        assert len(d.vertices(1)) == 2
        assert incidence_matrix(d, 1) == [[2, 2]]
        assert incidence_matrix(d, 2) == [[1], [1]]
        assert height_recursion_report(fd).ok
        assert round_trip_report(fd).ok

    def test_all_diagonal(self):
        points = tuple(range(5))
        fd = diagram_from_filtration(points, [FiniteEqRel.identity(points)] * 3)
        d = fd.diagram
        assert all(len(d.vertices(n)) == 5 for n in (1, 2))
        assert len(enumerate_paths(d, 2)) == 5

    def test_chain_must_start_at_the_diagonal(self):
        with pytest.raises(RelationError):
            diagram_from_filtration(X4, [FiniteEqRel.full(X4)])
        with pytest.raises(RelationError, match="no level above"):
            diagram_from_filtration(X4, [FiniteEqRel.identity(X4)])

    @given(seeds)
    def test_round_trip_on_random_chains(self, seed):
        rng = random.Random(seed)
        points = tuple(range(rng.randint(1, 12)))
        chain = random_chain(rng, points, rng.randint(2, 5))
        fd = diagram_from_filtration(points, chain)
        assert fd.coding.verify().ok
        assert round_trip_report(fd).ok
        assert height_recursion_report(fd).ok


class TestTransverseDiagrams:
    def test_two_point_gives_tree_and_loop(self):
        points = (0, 1)
        tb = transverse_diagrams(points, [FiniteEqRel.identity(points)] * 5, FiniteEqRel.full(points))
        assert tb.shift == 0
        assert diagrams_isomorphic(tb.d, two_branch_tree(4))
        assert diagrams_isomorphic(tb.d_prime, loop_then_chain(4))
        assert validate_quotient(tb.quotient).ok

    def test_diagonal_s_gives_identity(self):
        chain = [FiniteEqRel.identity(X4), FiniteEqRel.identity(X4), FiniteEqRel(X4, [[1, 2], [3, 4]])]
        tb = transverse_diagrams(X4, chain, FiniteEqRel.identity(X4))
        assert tb.d == tb.d_prime
        identity = DiagramQuotient.identity(tb.d)
        assert tb.quotient.vertex_maps == identity.vertex_maps
        assert tb.quotient.edge_maps == identity.edge_maps

    def test_shift_on_eight_points(self):
        s = relation_from_group_action(X8, [permutation_from_cycles(X8, [(i, i + 4) for i in range(1, 5)])])
        chain = [FiniteEqRel.identity(X8), FiniteEqRel(X8, [[1, 2], [3, 4], [5, 6], [7, 8]]),
                 FiniteEqRel(X8, [[1, 2, 3, 4], [5, 6, 7, 8]])]
        tb = transverse_diagrams(X8, chain, s)
        assert tb.shift == 1
        assert validate_quotient(tb.quotient).ok
        assert check_transverse_build(tb).ok
        af1 = {frozenset(c) for c in af_classes_at(tb.d_prime, 1)}
        assert af1 == tb.large.coding.image_classes(s)

    def test_quotient_is_t_injective_on_first_level(self):
        points = (0, 1)
        tb = transverse_diagrams(points, [FiniteEqRel.identity(points)] * 3, FiniteEqRel.full(points))
        ranges = [e.range for e in tb.d.edges(1)]
        assert len(ranges) == len(set(ranges))
        assert graded_isomorphism(tb.d, two_branch_tree(2)) is not None

    @given(seeds)
    def test_random_instances_pass_every_check(self, seed):
        rng = random.Random(seed)
        points, chain, s = random_transverse_instance(rng, max_points=8, depth=rng.randint(1, 3))
        tb = transverse_diagrams(points, chain, s)
        assert validate_quotient(tb.quotient).ok
        assert check_transverse_build(tb).ok
