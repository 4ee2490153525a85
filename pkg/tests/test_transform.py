from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from ensembles.core import events as ev
from ensembles.core.alphabet import BINARY, NaturalAlphabet
from ensembles.core.space import GeometricDistribution, conditional_distribution
from ensembles.core.transform import (
    Decision,
    EnsembleStream,
    IndexMap,
    Provenance,
    SelectionRule,
    _extend_cumulative,
    characteristic,
    condition,
    contract,
    from_symbols,
    map_stream,
    partition_variable,
    periodic,
    product_stream,
    sample_ensemble,
    select,
    shuffle,
    split_seeds,
)
from ensembles.models.errors import (
    BudgetExhaustedError,
    ForeignSymbolError,
    InjectivityViolationError,
    PartitionViolationError,
    StreamExhaustedError,
    UndefinedSelectorError,
)

N = NaturalAlphabet()


def naturals():
    def factory():
        k = 0
        while True:
            yield k
            k += 1
    return EnsembleStream(N, factory, Provenance("naturals"))


class TestSampling:
    def test_same_seed_same_prefix(self, geom2):
        assert sample_ensemble(geom2, 7).prefix(500) == sample_ensemble(geom2, 7).prefix(500)

    def test_different_seeds_differ(self, geom2):
        assert sample_ensemble(geom2, 1).prefix(200) != sample_ensemble(geom2, 2).prefix(200)

    def test_clone_restarts(self, geom2):
        alpha = sample_ensemble(geom2, 3)
        head = alpha.take(10)
        rest = alpha.take(10)
        assert alpha.clone().prefix(20) == head + rest

    def test_negative_seed(self, geom2):
        with pytest.raises(ValueError):
            sample_ensemble(geom2, -1)

    def test_point_mass_emits_only_its_symbol(self, unit_at_three):
        assert set(sample_ensemble(unit_at_three, 11).prefix(100_000)) == {3}

    def test_zero_mass_symbol_never_drawn(self, holed):
        counts = Counter(sample_ensemble(holed, 5).prefix(100_000))
        assert counts[1] == 0
        assert set(counts) == {0, 2}

    @pytest.mark.slow
    def test_zero_mass_symbol_never_drawn_at_scale(self, holed):
        counts = Counter(sample_ensemble(holed, 9).prefix(10_000_000))
        assert counts[1] == 0

    def test_geometric_sampler_reaches_deep_symbols(self, geom2):
        assert max(sample_ensemble(geom2, 4).prefix(100_000)) > 8

    def test_wide_geometric_extends_truncation_incrementally(self):
        P = GeometricDistribution(Fraction(1, 1000))
        draws = sample_ensemble(P, 12).prefix(70_000)
        assert max(draws) > 4096
        assert abs(sum(draws) / len(draws) - 999) < 40

    def test_incremental_cdf_matches_exact_partial_sums(self, geom2, three):
        for P in (geom2, GeometricDistribution(Fraction(1, 1000)), three):
            width = 3 if P is three else 64
            cdf = _extend_cumulative(P, np.empty(0), 8 if width > 8 else width)
            cdf = _extend_cumulative(P, cdf, width)
            assert len(cdf) == width
            assert np.all(np.diff(cdf) >= 0)
            for i in (0, width // 2, width - 1):
                assert abs(cdf[i] - float(P.partial_sum(i + 1))) < 1e-12
        assert _extend_cumulative(three, np.empty(0), 3)[-1] == 1.0

    def test_split_seeds(self):
        seeds = split_seeds(42, 3)
        assert len(set(seeds)) == 3
        assert seeds == split_seeds(42, 3)

    def test_provenance_describes_source(self, geom2):
        assert sample_ensemble(geom2, 1).provenance.describe() == "sample(distribution=geometric(p=1/2), seed=1)"


class TestRecordedStreams:
    def test_prefix_past_end(self):
        alpha = from_symbols([1, 2, 3], N)
        assert alpha.prefix(3) == [1, 2, 3]
        with pytest.raises(StreamExhaustedError):
            alpha.prefix(4)

    def test_foreign_symbol(self):
        with pytest.raises(ForeignSymbolError):
            from_symbols([0, 2], BINARY)

    def test_periodic(self):
        assert periodic([0, 1], BINARY).prefix(5) == [0, 1, 0, 1, 0]


class TestShuffle:
    def test_stride(self):
        beta = shuffle(naturals(), IndexMap("stride2", lambda k: 2 * k))
        assert beta.prefix(4) == [1, 3, 5, 7]

    def test_identity_map(self):
        assert shuffle(naturals(), IndexMap("id", lambda k: k)).prefix(5) == [0, 1, 2, 3, 4]

    def test_reversal_in_blocks(self):
        swap = IndexMap("swap", lambda k: k + 1 if k % 2 else k - 1)
        assert shuffle(naturals(), swap).prefix(6) == [1, 0, 3, 2, 5, 4]

    def test_non_injective(self):
        halve = IndexMap("halve", lambda k: (k + 1) // 2)
        with pytest.raises(InjectivityViolationError) as info:
            shuffle(naturals(), halve).prefix(3)
        assert (info.value.first, info.value.second, info.value.image) == (1, 2, 1)

    def test_keeps_distribution(self, geom2):
        beta = shuffle(sample_ensemble(geom2, 1), IndexMap("id", lambda k: k))
        assert beta.distribution is geom2


class TestSelection:
    def test_every_other(self):
        rule = SelectionRule("odd-positions", lambda prefix: len(prefix) % 2 == 0)
        assert select(naturals(), rule).prefix(4) == [0, 2, 4, 6]

    def test_after_zero(self):
        alpha = from_symbols([0, 5, 1, 0, 7, 0, 0, 3], N)
        rule = SelectionRule("after0", lambda prefix: bool(prefix) and prefix[-1] == 0)
        assert list(select(alpha, rule).clone()) == [5, 7, 0, 3]

    def test_undefined(self):
        rule = SelectionRule("partial", lambda prefix: None if len(prefix) == 2 else True)
        with pytest.raises(UndefinedSelectorError):
            select(naturals(), rule).prefix(3)

    def test_decision_enum_passes_through(self):
        rule = SelectionRule("explicit", lambda prefix: Decision.YES)
        assert rule.decide([]) is Decision.YES

    def test_budget(self):
        never = SelectionRule("never", lambda prefix: False)
        with pytest.raises(BudgetExhaustedError) as info:
            select(naturals(), never, budget=50).prefix(1)
        assert info.value.scanned == 51


class TestConditioning:
    def test_keeps_members_in_order(self, even):
        alpha = from_symbols([1, 2, 3, 4, 5, 6], N)
        assert list(condition(alpha, even).clone()) == [2, 4, 6]

    def test_null_event_exhausts_budget(self):
        with pytest.raises(BudgetExhaustedError):
            condition(naturals(), ev.empty(), budget=100).prefix(1)

    def test_paired_with_conditional(self, geom2, even):
        beta = condition(sample_ensemble(geom2, 1), even)
        assert beta.distribution.mass(0) == conditional_distribution(geom2, even).mass(0)
        assert all(a % 2 == 0 for a in beta.prefix(1_000))

    def test_whole_space_is_identity(self, geom2):
        alpha = sample_ensemble(geom2, 2)
        assert condition(alpha, ev.whole()).prefix(300) == alpha.prefix(300)


class TestMaps:
    def test_characteristic(self, geom2):
        alpha = from_symbols([0, 3, 1, 0], N, distribution=geom2)
        chi = characteristic(alpha, ev.singleton(0))
        assert chi.prefix(4) == [1, 0, 0, 1]
        assert chi.distribution.mass(1) == Fraction(1, 2)

    def test_map_mod3(self, geom2):
        beta = map_stream(from_symbols([4, 5, 6], N, distribution=geom2), ev.modulo(3))
        assert beta.prefix(3) == [1, 2, 0]
        assert beta.distribution.mass(0) == Fraction(4, 7)

    def test_map_outside_codomain(self):
        liar = ev.RandomVariable("liar", lambda a: a + 2, N, BINARY)
        with pytest.raises(ForeignSymbolError):
            map_stream(from_symbols([0], N), liar).prefix(1)

    def test_contract(self, geom2, even):
        alpha = from_symbols([0, 1, 2, 3], N, distribution=geom2)
        beta = contract(alpha, [even, ev.odd()], ["e", "o"])
        assert beta.prefix(4) == ["e", "o", "e", "o"]
        assert beta.distribution.mass("e") == Fraction(2, 3)

    def test_partition_overlap(self, even):
        with pytest.raises(PartitionViolationError):
            partition_variable([even, ev.less_than(3)], [0, 1], N, check_width=4)

    def test_partition_gap(self, even):
        with pytest.raises(PartitionViolationError) as info:
            partition_variable([even, ev.singleton(1)], [0, 1], N, check_width=4)
        assert info.value.symbol == 3


class TestProducts:
    def test_zip(self, geom2):
        a = from_symbols([0, 1, 2], N, distribution=geom2)
        b = from_symbols([5, 6, 7], N, distribution=geom2)
        joint = product_stream(a, b)
        assert joint.prefix(3) == [(0, 5), (1, 6), (2, 7)]
        assert joint.distribution.mass((0, 1)) == Fraction(1, 8)

    def test_shorter_component_ends_product(self):
        a = from_symbols([0, 1], N)
        b = from_symbols([0, 1, 2], N)
        assert list(product_stream(a, b).clone()) == [(0, 0), (1, 1)]

    def test_needs_two_streams(self):
        with pytest.raises(ValueError):
            product_stream(naturals())

    def test_provenance_chain(self, geom2, even):
        beta = characteristic(condition(sample_ensemble(geom2, 3), even), ev.singleton(0))
        assert beta.provenance.describe().startswith("characteristic(event={0}, condition(event=even, sample(")
