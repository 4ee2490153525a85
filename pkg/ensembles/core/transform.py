"""Ensembles as lazy, seed-reproducible streams and the operations on them.

A stream is rebuilt from its factory whenever it is cloned, so every derived
stream reads its parents through fresh clones and two streams with the same
provenance always produce the same symbols.
"""
from dataclasses import dataclass
from enum import Enum
from itertools import islice
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ensembles.config import settings
from ensembles.core.alphabet import CountableAlphabet, FiniteAlphabet, ProductAlphabet, SubAlphabet
from ensembles.core.events import EventPredicate, RandomVariable, empty, indicator
from ensembles.core.space import (
    DiscreteDistribution,
    conditional_distribution,
    product_distribution,
    pushforward,
)
from ensembles.models.errors import (
    BudgetExhaustedError,
    ForeignSymbolError,
    InjectivityViolationError,
    PartitionViolationError,
    StreamExhaustedError,
    UndefinedSelectorError,
)
from ensembles.utils.helpers import Symbol


@dataclass(frozen=True)
class Provenance:
    op: str
    params: Tuple[Tuple[str, str], ...] = ()
    parents: Tuple["Provenance", ...] = ()

    def describe(self) -> str:
        inner = [f"{k}={v}" for k, v in self.params] + [p.describe() for p in self.parents]
        if not inner:
            return self.op
        return f"{self.op}({', '.join(inner)})"


class EnsembleStream:
    """A lazy infinite sequence over an alphabet; single consumer while iterating."""

    def __init__(self, alphabet: CountableAlphabet, factory: Callable[[], Iterator[Symbol]],
                 provenance: Provenance, distribution: Optional[DiscreteDistribution] = None):
        self.alphabet = alphabet
        self.factory = factory
        self.provenance = provenance
        self.distribution = distribution
        self._iterator: Optional[Iterator[Symbol]] = None

    def __iter__(self) -> "EnsembleStream":
        return self

    def __next__(self) -> Symbol:
        if self._iterator is None:
            self._iterator = self.factory()
        return next(self._iterator)

    def clone(self) -> "EnsembleStream":
        return EnsembleStream(self.alphabet, self.factory, self.provenance, self.distribution)

    def prefix(self, n: int) -> List[Symbol]:
        """alpha restricted to n, read from a fresh clone."""
        out = list(islice(self.factory(), n))
        if len(out) < n:
            raise StreamExhaustedError(n, len(out))
        return out

    def take(self, n: int) -> List[Symbol]:
        """Consume the next n symbols of this stream."""
        out = list(islice(self, n))
        if len(out) < n:
            raise StreamExhaustedError(n, len(out))
        return out

    def __repr__(self) -> str:
        return f"<EnsembleStream {self.provenance.describe()}>"


def from_symbols(symbols: Sequence[Symbol], alphabet: CountableAlphabet,
                 provenance: Optional[Provenance] = None,
                 distribution: Optional[DiscreteDistribution] = None) -> EnsembleStream:
    """A finite recorded prefix presented as a stream; prefix/take past its end raise StreamExhaustedError."""
    frozen = tuple(symbols)
    for symbol in frozen:
        alphabet.require(symbol)
    provenance = provenance or Provenance("recorded", (("length", str(len(frozen))),))
    return EnsembleStream(alphabet, lambda: iter(frozen), provenance, distribution)


def periodic(pattern: Sequence[Symbol], alphabet: CountableAlphabet) -> EnsembleStream:
    """The stream pattern, pattern, pattern, ..."""
    frozen = tuple(alphabet.require(s) for s in pattern)

    def factory() -> Iterator[Symbol]:
        while True:
            yield from frozen

    return EnsembleStream(alphabet, factory, Provenance("periodic", (("pattern", str(list(frozen))),)))


def split_seeds(seed: int, k: int) -> List[int]:
    """k independent 64-bit child seeds derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(k)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def _extend_cumulative(P: DiscreteDistribution, cumulative: np.ndarray, width: int) -> np.ndarray:
    """Append F(start+1) .. F(width) to a float CDF that already covers `start` indices."""
    start = len(cumulative)
    if width <= start:
        return cumulative
    base = cumulative[-1] if start else 0.0
    masses = np.fromiter((P.float_mass_at(i) for i in range(start, width)), dtype=np.float64, count=width - start)
    block = base + np.cumsum(masses)
    # float drift: lift the last entry to the exact partial sum; zero-mass entries stay flat
    if masses[-1] > 0:
        block[-1] = max(block[-1], float(P.partial_sum(width)))
    return np.concatenate([cumulative, block])


def _sample_indices(P: DiscreteDistribution, seed: int) -> Iterator[int]:
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    limit = settings.max_sampling_width
    for cap in (P.support_size, P.alphabet.size):
        if cap is not None:
            limit = min(limit, cap)
    width = min(settings.default_truncation_width, limit)
    cumulative = _extend_cumulative(P, np.empty(0, dtype=np.float64), width)
    while True:
        u = rng.random(settings.sample_block_size)
        # left-closed intervals [F(i-1), F(i)): zero-mass symbols are never hit
        indices = np.searchsorted(cumulative, u, side="right")
        while indices.max() >= width:
            if width >= limit:
                raise BudgetExhaustedError("inverse-CDF truncation", width, limit)
            width = min(width * 2, limit)
            logger.debug(f"sampler for {P.describe()} extended truncation to {width} symbols")
            cumulative = _extend_cumulative(P, cumulative, width)
            indices = np.searchsorted(cumulative, u, side="right")
        yield from indices.tolist()


def sample_ensemble(P: DiscreteDistribution, seed: int) -> EnsembleStream:
    """i.i.d. draws from P by inverse CDF over the enumeration order."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")

    def factory() -> Iterator[Symbol]:
        enumerate_symbol = P.alphabet.enumerate
        for index in _sample_indices(P, seed):
            yield enumerate_symbol(index)

    provenance = Provenance("sample", (("distribution", P.describe()), ("seed", str(seed))))
    return EnsembleStream(P.alphabet, factory, provenance, P)


# Shuffling

@dataclass(frozen=True)
class IndexMap:
    """An index map f on the positive integers; output(k) = alpha(f(k))."""

    name: str
    apply: Callable[[int], int]

    def __call__(self, k: int) -> int:
        return self.apply(k)


def _shuffled(source: EnsembleStream, f: IndexMap) -> Iterator[Symbol]:
    buffer: List[Symbol] = []
    preimages: Dict[int, int] = {}
    k = 1
    while True:
        j = f(k)
        if j < 1:
            raise ValueError(f"index map {f.name} sent {k} to {j}, outside the positive integers")
        if j in preimages:
            raise InjectivityViolationError(preimages[j], k, j)
        preimages[j] = k
        while len(buffer) < j:
            try:
                buffer.append(next(source))
            except StopIteration:
                return
        yield buffer[j - 1]
        k += 1


def shuffle(alpha: EnsembleStream, f: IndexMap) -> EnsembleStream:
    provenance = Provenance("shuffle", (("map", f.name),), (alpha.provenance,))
    return EnsembleStream(alpha.alphabet, lambda: _shuffled(alpha.clone(), f), provenance, alpha.distribution)


# Selection

class Decision(str, Enum):
    YES = "yes"
    NO = "no"
    UNDEFINED = "undefined"


RuleOutput = Union[Decision, bool, None]


@dataclass(frozen=True)
class SelectionRule:
    """decide(alpha restricted to n) says whether alpha(n+1) is selected.

    The prefix handed to `decide` is the live read buffer; rules must not mutate it.
    """

    name: str
    decide_fn: Callable[[Sequence[Symbol]], RuleOutput]

    def decide(self, prefix: Sequence[Symbol]) -> Decision:
        verdict = self.decide_fn(prefix)
        if isinstance(verdict, Decision):
            return verdict
        if verdict is None:
            return Decision.UNDEFINED
        return Decision.YES if verdict else Decision.NO


def _selected(source: EnsembleStream, rule: SelectionRule, budget: int) -> Iterator[Symbol]:
    prefix: List[Symbol] = []
    since_last = 0
    while True:
        decision = rule.decide(prefix)
        if decision is Decision.UNDEFINED:
            raise UndefinedSelectorError(rule.name, len(prefix))
        try:
            symbol = next(source)
        except StopIteration:
            return
        if decision is Decision.YES:
            since_last = 0
            yield symbol
        else:
            since_last += 1
            if since_last > budget:
                raise BudgetExhaustedError(f"selection by {rule.name}", since_last, budget)
        prefix.append(symbol)


def select(alpha: EnsembleStream, rule: SelectionRule, budget: Optional[int] = None) -> EnsembleStream:
    budget = budget or settings.scan_budget
    provenance = Provenance("select", (("rule", rule.name),), (alpha.provenance,))
    return EnsembleStream(alpha.alphabet, lambda: _selected(alpha.clone(), rule, budget), provenance,
                          alpha.distribution)


# Conditioning

def _conditioned(source: EnsembleStream, event: EventPredicate, budget: int) -> Iterator[Symbol]:
    misses = 0
    for symbol in source:
        if event.member(symbol):
            misses = 0
            yield symbol
        else:
            misses += 1
            if misses > budget:
                raise BudgetExhaustedError(f"conditioning on {event.name}", misses, budget)


def condition(alpha: EnsembleStream, event: EventPredicate, budget: Optional[int] = None) -> EnsembleStream:
    """alpha restricted to B: every symbol outside B deleted."""
    budget = budget or settings.scan_budget
    distribution = None
    if alpha.distribution is not None:
        distribution = conditional_distribution(alpha.distribution, event)
    provenance = Provenance("condition", (("event", event.name),), (alpha.provenance,))
    return EnsembleStream(SubAlphabet(alpha.alphabet, event),
                          lambda: _conditioned(alpha.clone(), event, budget), provenance, distribution)


# Pointwise maps

def _mapped(source: EnsembleStream, variable: RandomVariable) -> Iterator[Symbol]:
    codomain = variable.codomain
    for symbol in source:
        image = variable.apply(symbol)
        if not codomain.contains(image):
            raise ForeignSymbolError(image, codomain.label)
        yield image


def _map_with(alpha: EnsembleStream, variable: RandomVariable, provenance: Provenance) -> EnsembleStream:
    distribution = None
    if alpha.distribution is not None:
        distribution = pushforward(alpha.distribution, variable)
    return EnsembleStream(variable.codomain, lambda: _mapped(alpha.clone(), variable), provenance, distribution)


def map_stream(alpha: EnsembleStream, variable: RandomVariable) -> EnsembleStream:
    """beta(k) = X(alpha(k)); paired with X(P)."""
    provenance = Provenance("map", (("variable", variable.name),), (alpha.provenance,))
    return _map_with(alpha, variable, provenance)


def characteristic(alpha: EnsembleStream, event: EventPredicate) -> EnsembleStream:
    """chi_A(alpha): 1 where alpha(n) is in A, else 0; paired with P_A."""
    provenance = Provenance("characteristic", (("event", event.name),), (alpha.provenance,))
    return _map_with(alpha, indicator(event, alpha.alphabet), provenance)


def partition_variable(partition: Sequence[EventPredicate], targets: Sequence[Symbol],
                       domain: CountableAlphabet, check_width: Optional[int] = None) -> RandomVariable:
    """The contraction a -> a_i for a in A_i, after spot-checking the partition."""
    if len(partition) != len(targets) or not partition:
        raise ValueError("partition and targets must be non-empty and of equal length")
    codomain = FiniteAlphabet(tuple(targets))
    for symbol in domain.first(check_width or settings.default_truncation_width):
        owners = [A.name for A in partition if A.member(symbol)]
        if not owners:
            raise PartitionViolationError(symbol, "not covered by any block")
        if len(owners) > 1:
            raise PartitionViolationError(symbol, f"in several blocks: {', '.join(owners)}")

    def apply(symbol: Symbol) -> Symbol:
        for block, target in zip(partition, targets):
            if block.member(symbol):
                return target
        raise PartitionViolationError(symbol, "not covered by any block")

    lookup = dict(zip(targets, partition))
    name = "contract[" + ",".join(f"{A.name}->{a}" for A, a in zip(partition, targets)) + "]"
    return RandomVariable(name, apply, domain, codomain, preimage=lambda x: lookup.get(x, empty()))


def contract(alpha: EnsembleStream, partition: Sequence[EventPredicate], targets: Sequence[Symbol],
             check_width: Optional[int] = None) -> EnsembleStream:
    """Replace members of A_i by a_i; paired with Q(a_i) = P(A_i)."""
    variable = partition_variable(partition, targets, alpha.alphabet, check_width)
    provenance = Provenance("contract", (("partition", variable.name),), (alpha.provenance,))
    return _map_with(alpha, variable, provenance)


# Products

def _zipped(sources: Sequence[EnsembleStream]) -> Iterator[Symbol]:
    while True:
        try:
            row = [next(s) for s in sources]
        except StopIteration:
            return
        yield tuple(row)


def product_stream(*streams: EnsembleStream) -> EnsembleStream:
    if len(streams) < 2:
        raise ValueError("a product stream needs at least two components")
    alphabet = ProductAlphabet([s.alphabet for s in streams])
    distribution = None
    if all(s.distribution is not None for s in streams):
        distribution = product_distribution(*(s.distribution for s in streams))
    provenance = Provenance("product", (), tuple(s.provenance for s in streams))
    return EnsembleStream(alphabet, lambda: _zipped([s.clone() for s in streams]), provenance, distribution)

