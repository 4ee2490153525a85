"""Empirical checks of the measure-one consequences on sampled ensembles.

Every check reads fixed-length prefixes from fresh clones, so a verdict is a
deterministic function of the streams' provenance and the parameters.
"""
import math
from collections import Counter
from itertools import combinations
from typing import Dict, List, Optional, Sequence

import numpy as np
from loguru import logger
from scipy import stats as scipy_stats

from ensembles.config import settings
from ensembles.core.events import EventPredicate
from ensembles.core.space import DiscreteDistribution, events_independent, truncate_alphabet
from ensembles.core.transform import EnsembleStream, condition, product_stream
from ensembles.models.schemas import (
    ConditionalIndependenceReport,
    EquivalenceReport,
    EventIndependenceReport,
    FrequencyReport,
    GapRow,
    IndependenceReport,
    SymbolDeviation,
)
from ensembles.models.errors import AlphabetMismatchError
from ensembles.utils.helpers import Symbol, format_symbol

MIN_LLN_SAMPLES = 1_000
MAX_EVENTS = 16


def _envelope(p: float, n: int, k_sigma: float) -> float:
    return k_sigma * math.sqrt(max(p * (1 - p), 0.0) / n)


def lln_check(alpha: EnsembleStream, P: DiscreteDistribution, n: int,
              symbols: Optional[Sequence[Symbol]] = None, k_sigma: Optional[float] = None) -> FrequencyReport:
    """|N_a(alpha restricted to n)/n - P(a)| <= k sigma for every listed symbol."""
    if n < MIN_LLN_SAMPLES:
        raise ValueError(f"lln_check needs at least {MIN_LLN_SAMPLES} samples, got {n}")
    k_sigma = k_sigma if k_sigma is not None else settings.default_k_sigma
    if symbols is None:
        symbols, _ = truncate_alphabet(P, 5)
    counts = Counter(alpha.prefix(n))
    rows = []
    for symbol in symbols:
        target = P.mass(symbol)
        p = float(target)
        count = counts.get(symbol, 0)
        frequency = count / n
        deviation = abs(frequency - p)
        bound = _envelope(p, n, k_sigma)
        rows.append(SymbolDeviation(symbol=format_symbol(symbol), count=count, frequency=frequency, target=target,
                                    deviation=deviation, bound=bound, passed=deviation <= bound))
    passed = all(row.passed for row in rows)
    logger.debug(f"lln_check over {n} samples against {P.describe()}: {'pass' if passed else 'fail'}")
    return FrequencyReport(
        n=n,
        k_sigma=k_sigma,
        counts={format_symbol(s): c for s, c in sorted(counts.items(), key=lambda kv: -kv[1])},
        rows=rows,
        target=P.describe(),
        passed=passed,
    )


def equivalence_check(alpha: EnsembleStream, beta: EnsembleStream, n: int, k_sigma: Optional[float] = None,
                      epsilon: Optional[float] = None) -> EquivalenceReport:
    """Two-sample frequency comparison over the symbols holding all but epsilon of the pooled mass."""
    if alpha.alphabet.universe != beta.alphabet.universe:
        raise AlphabetMismatchError(alpha.alphabet.label, beta.alphabet.label)
    k_sigma = k_sigma if k_sigma is not None else settings.default_k_sigma
    epsilon = epsilon if epsilon is not None else settings.equivalence_epsilon
    first, second = Counter(alpha.prefix(n)), Counter(beta.prefix(n))
    pooled = first + second
    rows: List[GapRow] = []
    covered = 0.0
    for symbol, total in pooled.most_common():
        if covered >= 1 - epsilon:
            break
        covered += total / (2 * n)
        p = total / (2 * n)
        gap = abs(first[symbol] - second[symbol]) / n
        bound = k_sigma * math.sqrt(2 * p * (1 - p) / n)
        rows.append(GapRow(symbol=format_symbol(symbol), count_first=first[symbol], count_second=second[symbol],
                           gap=gap, bound=bound, passed=gap <= bound))
    return EquivalenceReport(n=n, k_sigma=k_sigma, rows=rows, covered_mass=covered,
                             passed=all(r.passed for r in rows))


def _cell_index(symbols: Sequence[Symbol], width: int) -> Dict[Symbol, int]:
    return {s: i for i, s in enumerate(symbols[:width])}


def independence_check(streams: Sequence[EnsembleStream], distributions: Sequence[DiscreteDistribution], n: int,
                       width: int = 4, threshold: Optional[float] = None,
                       significance: Optional[float] = None) -> IndependenceReport:
    """Empirical joint of the zipped streams against the product of the target marginals.

    Each coordinate keeps its first `width` symbols as cells; everything else
    falls into one "other" cell so the degrees of freedom stay fixed.
    """
    if len(streams) < 2 or len(streams) != len(distributions):
        raise ValueError("need at least two streams, one target distribution each")
    threshold = threshold if threshold is not None else settings.independence_threshold
    significance = significance if significance is not None else settings.chi2_significance
    m = len(streams)
    side = width + 1
    lookups = []
    marginals = []
    for P in distributions:
        symbols = P.alphabet.first(width)
        masses = [float(P.mass(s)) for s in symbols] + [0.0] * (width - len(symbols))
        marginals.append(np.array(masses + [max(0.0, 1.0 - sum(masses))]))
        lookups.append(_cell_index(symbols, width))

    codes = np.zeros(n, dtype=np.int64)
    for position, row in enumerate(product_stream(*streams).prefix(n)):
        code = 0
        for lookup, symbol in zip(lookups, row):
            code = code * side + lookup.get(symbol, width)
        codes[position] = code
    observed = np.bincount(codes, minlength=side ** m).astype(np.float64)

    expected = marginals[0]
    for marginal in marginals[1:]:
        expected = np.outer(expected, marginal).ravel()
    total_variation = 0.5 * float(np.abs(observed / n - expected).sum())

    positive = expected > 0
    unexpected = int(np.count_nonzero(observed[~positive]))
    chi_square = float((((observed - n * expected) ** 2)[positive] / (n * expected[positive])).sum())
    dof = max(int(np.count_nonzero(positive)) - 1, 0)
    quantile = float(scipy_stats.chi2.ppf(1 - significance, dof)) if dof > 0 else 0.0
    passed = total_variation <= threshold and unexpected == 0 and (dof == 0 or chi_square <= quantile)

    def label(code: int) -> str:
        parts = []
        for _ in range(m):
            code, digit = divmod(code, side)
            parts.append("other" if digit == width else str(digit))
        return ",".join(reversed(parts))

    return IndependenceReport(
        n=n,
        width=width,
        joint_counts={label(c): int(v) for c, v in enumerate(observed) if v},
        expected={label(c): float(v) for c, v in enumerate(expected) if v},
        chi_square=chi_square,
        chi_square_quantile=quantile,
        degrees_of_freedom=dof,
        unexpected_cells=unexpected,
        total_variation=total_variation,
        threshold=threshold,
        passed=passed,
    )


def event_independence_check(alpha: EnsembleStream, events: Sequence[EventPredicate], n: int,
                             P: Optional[DiscreteDistribution] = None,
                             threshold: Optional[float] = None) -> EventIndependenceReport:
    """Joint of (chi_A1, ..., chi_Am) over all 2^m cells against the product of its marginals."""
    m = len(events)
    if m > MAX_EVENTS:
        raise ValueError(f"at most {MAX_EVENTS} events, got {m}")
    if m < 2:
        raise ValueError("need at least two events")
    threshold = threshold if threshold is not None else settings.independence_threshold
    bits = np.array([[1 if A.member(s) else 0 for A in events] for s in alpha.prefix(n)], dtype=np.int64)
    codes = bits @ (1 << np.arange(m, dtype=np.int64))
    observed = np.bincount(codes, minlength=1 << m) / n
    marginal = bits.mean(axis=0)

    expected = np.ones(1 << m)
    for cell in range(1 << m):
        for i in range(m):
            expected[cell] *= marginal[i] if cell >> i & 1 else 1 - marginal[i]
    total_variation = 0.5 * float(np.abs(observed - expected).sum())

    max_gap = 0.0
    for k in range(2, m + 1):
        for chosen in combinations(range(m), k):
            joint = float(bits[:, list(chosen)].all(axis=1).mean())
            max_gap = max(max_gap, abs(joint - float(np.prod(marginal[list(chosen)]))))

    def label(cell: int) -> str:
        return "".join(str(cell >> i & 1) for i in range(m))

    return EventIndependenceReport(
        n=n,
        events=[A.name for A in events],
        cell_counts={label(c): int(round(v * n)) for c, v in enumerate(observed) if v},
        total_variation=total_variation,
        max_subset_gap=max_gap,
        threshold=threshold,
        exact_independent=events_independent(P, events) if P is not None else None,
        passed=total_variation <= threshold and max_gap <= threshold,
    )


def conditional_independence_check(alpha: EnsembleStream, first: EventPredicate, given: EventPredicate, n: int,
                                   k_sigma: Optional[float] = None) -> ConditionalIndependenceReport:
    """A and B are independent iff chi_A(alpha) and chi_A(alpha restricted to B) are equivalent."""
    k_sigma = k_sigma if k_sigma is not None else settings.default_k_sigma
    unconditioned = sum(1 for s in alpha.prefix(n) if first.member(s)) / n
    conditioned_stream = condition(alpha.clone(), given)
    conditioned = sum(1 for s in conditioned_stream.prefix(n) if first.member(s)) / n
    pooled = (unconditioned + conditioned) / 2
    bound = k_sigma * math.sqrt(2 * pooled * (1 - pooled) / n)
    gap = abs(unconditioned - conditioned)
    return ConditionalIndependenceReport(
        n_unconditioned=n,
        n_conditioned=n,
        frequency_a=unconditioned,
        frequency_a_given_b=conditioned,
        gap=gap,
        bound=bound,
        equivalent=gap <= bound,
    )
