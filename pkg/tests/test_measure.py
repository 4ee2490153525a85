import random
from fractions import Fraction
from itertools import product

import pytest

from ensembles.core.measure import (
    check_covering_equality,
    check_disjoint_additivity,
    check_monotonicity,
    check_restriction_bound,
    check_subadditivity,
    cylinders_disjoint,
    from_distribution,
    inclusion_residual,
    intersection_cover,
    open_set_measure,
    prefix_free_sets,
    restrict,
)
from ensembles.core.space import PrefixFreeSet, prefix_free_cover
from ensembles.models.errors import CoverViolationError, InclusionViolationError
from ensembles.utils.helpers import is_prefix

TERNARY_DEPTH2 = list(prefix_free_sets((0, 1, 2), 2))
BINARY_DEPTH3 = list(prefix_free_sets((0, 1), 3))


def _contained(E: PrefixFreeSet, F: PrefixFreeSet) -> bool:
    """[[E]] within [[F]] over a finite universe where every E member is covered by
    an F member prefixing it or by F members covering all of its children."""
    return all(any(is_prefix(f, e) for f in F.strings) for e in E.strings)


class TestEnumeration:
    def test_counts(self):
        assert len(TERNARY_DEPTH2) == 730
        assert len(BINARY_DEPTH3) == 677

    def test_all_distinct(self):
        assert len(set(TERNARY_DEPTH2)) == 730

    def test_depth_zero(self):
        assert list(prefix_free_sets((0, 1), 0)) == [PrefixFreeSet(), PrefixFreeSet([()])]


class TestRepresentation:
    def test_from_distribution_is_consistent(self, geom2):
        r = from_distribution(geom2)
        sigma = (0, 1)
        assert r(sigma) == Fraction(1, 8)
        assert r(sigma) - r.children_sum(sigma, 5) == r.consistency_residual(sigma, 5)

    def test_finite_support_residual_vanishes(self, three):
        r = from_distribution(three)
        assert r.children_sum((1,), 3) == r((1,))
        assert r.consistency_residual((1,), 3) == 0


class TestRestrictionBound:
    def test_example(self, geom2):
        r = from_distribution(geom2)
        E = [(0, 0), (0, 1), (1,)]
        assert restrict(E, (0,)).members == PrefixFreeSet([(0, 0), (0, 1)])
        bound = check_restriction_bound(r, E, (0,))
        assert bound.holds
        assert bound.restricted_mass == Fraction(3, 8)
        assert bound.anchor_mass == Fraction(1, 2)

    @pytest.mark.parametrize("universe", [TERNARY_DEPTH2, BINARY_DEPTH3])
    def test_exhaustive(self, three, universe):
        r = from_distribution(three)
        symbols = sorted({a for E in universe for s in E for a in s})
        anchors = [()] + [(a,) for a in symbols] + [(a, b) for a in symbols for b in symbols]
        for E in universe:
            for rho in anchors:
                assert check_restriction_bound(r, E, rho).holds


class TestCoveringEquality:
    def test_finite_support_is_exact(self, three):
        r = from_distribution(three)
        E = [(0,), (1, 0), (1, 1), (1, 2), (2,)]
        report = check_covering_equality(r, E, (), 3)
        assert report.equal_up_to_residual
        assert report.gap == 0
        assert report.residual == 0

    def test_geometric_within_residual(self, geom2):
        r = from_distribution(geom2)
        E = [(a,) for a in range(6)]
        report = check_covering_equality(r, E, (), 6)
        assert report.equal_up_to_residual
        assert report.gap == Fraction(1, 64)
        assert report.residual == Fraction(1, 64)

    def test_gap_names_escaping_branch(self, three):
        r = from_distribution(three)
        with pytest.raises(CoverViolationError) as info:
            check_covering_equality(r, [(0,), (1,)], (), 3)
        assert info.value.witness == (2,)


class TestMonotonicity:
    def test_example(self, three):
        r = from_distribution(three)
        E = [(0, 1), (2,)]
        F = [(0,), (2,)]
        verdict = check_monotonicity(r, E, F, 3)
        assert verdict
        assert verdict.lhs == Fraction(1, 6) + Fraction(1, 6)
        assert verdict.rhs == Fraction(2, 3)

    def test_cover_by_children(self, three):
        r = from_distribution(three)
        E = [(0,)]
        F = [(0, 0), (0, 1), (0, 2)]
        assert inclusion_residual(r, E, F, 3) == 0
        verdict = check_monotonicity(r, E, F, 3)
        assert verdict.lhs == verdict.rhs

    def test_truncated_inclusion_does_not_loosen_verdict(self, geom2):
        r = from_distribution(geom2)
        verdict = check_monotonicity(r, [(0,)], [(0, 0), (0, 1)], 2)
        assert not verdict
        assert verdict.lhs == Fraction(1, 2)
        assert verdict.rhs == Fraction(3, 8)
        assert verdict.residual == Fraction(1, 8)

    def test_non_inclusion(self, three):
        r = from_distribution(three)
        with pytest.raises(InclusionViolationError):
            check_monotonicity(r, [(1,)], [(0,)], 3)

    def test_exhaustive_on_prefix_inclusions(self, three):
        r = from_distribution(three)
        checked = 0
        for E in TERNARY_DEPTH2:
            for F in TERNARY_DEPTH2:
                if _contained(E, F):
                    assert check_monotonicity(r, E, F, 3)
                    checked += 1
        assert checked > 730


class TestOpenSets:
    def test_generator_invariance(self, geom2):
        r = from_distribution(geom2)
        S = [(0,), (1, 1)]
        T = [(0,), (0, 3), (1, 1), (1, 1, 2)]
        assert open_set_measure(r, S) == open_set_measure(r, T) == Fraction(1, 2) + Fraction(1, 16)

    def test_generator_invariance_exhaustive(self, three):
        r = from_distribution(three)
        for E in TERNARY_DEPTH2:
            strings = list(E.strings)
            padded = strings + [s + (0,) for s in strings]
            assert open_set_measure(r, padded) == r.of_set(E)

    def test_intersection_cover(self, three):
        S = [(0,), (1, 2)]
        T = [(0, 1), (1,)]
        assert intersection_cover(S, T) == PrefixFreeSet([(0, 1), (1, 2)])
        assert cylinders_disjoint([(0,)], [(1,), (2, 0)])

    def test_disjoint_additivity_exhaustive(self, three):
        r = from_distribution(three)
        pairs = 0
        for E in BINARY_DEPTH3[::7]:
            for F in BINARY_DEPTH3[::11]:
                if cylinders_disjoint(E, F):
                    assert check_disjoint_additivity(r, E, F)
                    pairs += 1
        assert pairs > 0

    def test_disjoint_additivity_rejects_overlap(self, three):
        with pytest.raises(ValueError):
            check_disjoint_additivity(from_distribution(three), [(0,)], [(0, 1)])

    def test_subadditivity(self, geom2):
        r = from_distribution(geom2)
        verdict = check_subadditivity(r, [[(0,)], [(0, 1), (2,)], [(2, 2)]])
        assert verdict
        assert verdict.lhs == Fraction(1, 2) + Fraction(1, 8)

    def test_ternary_depth3_sampled(self, three):
        rng = random.Random(20240517)
        r = from_distribution(three)
        strings = [s for n in range(4) for s in product(range(3), repeat=n)]
        for _ in range(300):
            E = prefix_free_cover(rng.sample(strings, rng.randint(1, 6)))
            F = prefix_free_cover(rng.sample(strings, rng.randint(1, 6)))
            for rho in [(), (0,), (1, 2)]:
                assert check_restriction_bound(r, E, rho).holds
            union = prefix_free_cover(list(E.strings) + list(F.strings))
            assert check_monotonicity(r, E, union, 3)
            assert open_set_measure(r, list(E.strings) + list(F.strings)) == r.of_set(union)
            if cylinders_disjoint(E, F):
                assert check_disjoint_additivity(r, E, F)
