from fractions import Fraction

import pytest

from ensembles.core import events as ev
from ensembles.core.space import GeometricDistribution, conditional_distribution, pushforward
from ensembles.core.transform import (
    IndexMap,
    SelectionRule,
    characteristic,
    condition,
    contract,
    map_stream,
    periodic,
    sample_ensemble,
    select,
    shuffle,
    split_seeds,
)
from ensembles.core.stats import (
    conditional_independence_check,
    equivalence_check,
    event_independence_check,
    independence_check,
    lln_check,
)
from ensembles.models.errors import AlphabetMismatchError
from ensembles.services.registry import registry


class TestLLN:
    def test_sampled_geometric_passes(self, geom2):
        report = lln_check(sample_ensemble(geom2, 1), geom2, 100_000)
        assert report.passed
        assert [row.symbol for row in report.rows] == ["0", "1", "2", "3", "4"]

    def test_wrong_target_fails(self, geom2):
        report = lln_check(sample_ensemble(geom2, 1), GeometricDistribution(Fraction(1, 3)), 100_000)
        assert not report.passed

    def test_needs_enough_samples(self, geom2):
        with pytest.raises(ValueError):
            lln_check(sample_ensemble(geom2, 1), geom2, 999)

    def test_zero_k_sigma_is_kept(self, geom2, unit_at_three):
        exact = lln_check(periodic([3], unit_at_three.alphabet), unit_at_three, 2_000, symbols=[3], k_sigma=0)
        assert exact.k_sigma == 0
        assert exact.passed
        sampled = lln_check(sample_ensemble(geom2, 1), geom2, 2_000, k_sigma=0)
        assert sampled.k_sigma == 0
        assert not sampled.passed

    def test_finite_support_checks_support_only(self, three):
        report = lln_check(sample_ensemble(three, 2), three, 50_000)
        assert report.passed
        assert len(report.rows) == 3

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(20))
    def test_acceptance_scale(self, geom2, seed):
        alpha = sample_ensemble(geom2, seed)
        assert lln_check(alpha, geom2, 1_000_000).passed
        assert not lln_check(alpha, GeometricDistribution(Fraction(2, 3)), 1_000_000).passed


class TestClosure:
    """Each transform of a sampled GEOM2 ensemble follows its prescribed distribution."""

    N_SAMPLES = 20_000

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_shuffle_by_primes(self, geom2, seed):
        beta = shuffle(sample_ensemble(geom2, seed), registry.index_map("primes"))
        assert lln_check(beta, geom2, self.N_SAMPLES).passed

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_selection_after_zero(self, geom2, seed):
        rule = SelectionRule("after0", lambda prefix: bool(prefix) and prefix[-1] == 0)
        beta = select(sample_ensemble(geom2, seed), rule)
        assert lln_check(beta, geom2, self.N_SAMPLES).passed

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_condition_on_even(self, geom2, even, seed):
        beta = condition(sample_ensemble(geom2, seed), even)
        assert beta.distribution.mass(0) == Fraction(3, 4)
        assert lln_check(beta, beta.distribution, self.N_SAMPLES).passed
        assert not lln_check(beta, geom2, self.N_SAMPLES, symbols=[0]).passed

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_contraction(self, geom2, even, seed):
        beta = contract(sample_ensemble(geom2, seed), [even, ev.odd()], [0, 1])
        assert lln_check(beta, beta.distribution, self.N_SAMPLES).passed

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_map_mod3(self, geom2, seed):
        beta = map_stream(sample_ensemble(geom2, seed), ev.modulo(3))
        assert lln_check(beta, pushforward(geom2, ev.modulo(3)), self.N_SAMPLES).passed

    @pytest.mark.parametrize("seed", [1, 2])
    def test_characteristic(self, geom2, seed):
        beta = characteristic(sample_ensemble(geom2, seed), ev.finite_event([0, 1]))
        assert beta.distribution.mass(1) == Fraction(3, 4)
        assert lln_check(beta, beta.distribution, self.N_SAMPLES).passed

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(10))
    def test_acceptance_scale(self, geom2, even, seed):
        alpha = sample_ensemble(geom2, seed)
        n = 100_000
        assert lln_check(shuffle(alpha, IndexMap("stride3", lambda k: 3 * k)), geom2, n).passed
        assert lln_check(select(alpha, registry.rule({"name": "every_k", "k": 3})), geom2, n).passed
        beta = condition(alpha, even)
        assert lln_check(beta, conditional_distribution(geom2, even), n).passed
        beta = contract(alpha, [even, ev.odd()], [0, 1])
        assert lln_check(beta, beta.distribution, n).passed
        beta = map_stream(alpha, ev.modulo(3))
        assert lln_check(beta, beta.distribution, n).passed


class TestEquivalence:
    def test_two_samples_of_same_distribution(self, geom2):
        report = equivalence_check(sample_ensemble(geom2, 1), sample_ensemble(geom2, 2), 50_000)
        assert report.passed
        assert report.covered_mass >= 1 - 1e-3

    def test_different_distributions(self, geom2):
        other = GeometricDistribution(Fraction(1, 3))
        assert not equivalence_check(sample_ensemble(geom2, 1), sample_ensemble(other, 2), 50_000).passed

    def test_conditioned_stream_shares_the_ambient_alphabet(self, geom2, even):
        alpha = sample_ensemble(geom2, 1)
        assert not equivalence_check(alpha, condition(alpha.clone(), even), 50_000).passed

    def test_different_alphabets_are_rejected(self, geom2):
        alpha = sample_ensemble(geom2, 1)
        with pytest.raises(AlphabetMismatchError):
            equivalence_check(alpha, map_stream(alpha.clone(), ev.modulo(3)), 10_000)


class TestIndependence:
    def test_independent_seeds(self, geom2):
        first, second = split_seeds(7, 2)
        streams = [sample_ensemble(geom2, first), sample_ensemble(geom2, second)]
        report = independence_check(streams, [geom2, geom2], 200_000)
        assert report.passed
        assert report.degrees_of_freedom == 24
        assert report.unexpected_cells == 0

    def test_duplicated_stream_is_dependent(self, geom2):
        alpha = sample_ensemble(geom2, 7)
        report = independence_check([alpha, alpha.clone()], [geom2, geom2], 50_000)
        assert not report.passed
        assert report.total_variation > 0.3

    def test_needs_matching_targets(self, geom2):
        with pytest.raises(ValueError):
            independence_check([sample_ensemble(geom2, 1)], [geom2], 1_000)

    @pytest.mark.slow
    def test_acceptance_scale(self, geom2):
        first, second = split_seeds(2024, 2)
        streams = [sample_ensemble(geom2, first), sample_ensemble(geom2, second)]
        report = independence_check(streams, [geom2, geom2], 1_000_000)
        assert report.passed
        assert report.total_variation <= 0.01


class TestEventIndependence:
    def test_even_and_small_are_independent(self, geom2, even):
        report = event_independence_check(sample_ensemble(geom2, 1), [even, ev.finite_event([0, 1])], 100_000,
                                          P=geom2)
        assert report.passed
        assert report.exact_independent is True

    def test_even_and_zero_are_dependent(self, geom2, even):
        report = event_independence_check(sample_ensemble(geom2, 1), [even, ev.singleton(0)], 100_000, P=geom2)
        assert not report.passed
        assert report.exact_independent is False
        assert report.max_subset_gap > 0.1

    def test_event_count_limits(self, geom2, even):
        with pytest.raises(ValueError):
            event_independence_check(sample_ensemble(geom2, 1), [even], 1_000)


class TestConditionalIndependence:
    def test_independent_events(self, geom2, even):
        report = conditional_independence_check(sample_ensemble(geom2, 3), even, ev.finite_event([0, 1]), 50_000)
        assert report.equivalent

    def test_dependent_events(self, geom2, even):
        report = conditional_independence_check(sample_ensemble(geom2, 3), ev.singleton(0), even, 50_000)
        assert not report.equivalent
        assert report.frequency_a_given_b > report.frequency_a
