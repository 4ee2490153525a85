"""Finite-stage Martin-Loef tests.

A test is a leveled family n -> C_n of prefix-free sets with
lambda_P([[C_n]]) < 2^-n. Levels come from budgeted generators, so every
verdict here is a statement about the materialized levels only.

The pullback constructions turn a test for a transformed ensemble into a test
for the original one: D_n is the union of F(sigma) over sigma in C_n, where
F(sigma) collects the original prefixes that the transformation maps onto
sigma. Each pullback also reports, per sigma, the mass of the materialized
F(sigma) against the mass it should carry, with a closed-form residual for
the truncation.
"""
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice, product
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from loguru import logger

from ensembles.config import settings
from ensembles.core.events import EventPredicate, RandomVariable
from ensembles.core.space import (
    ConditionalDistribution,
    DiscreteDistribution,
    PrefixFreeSet,
    PushforwardDistribution,
    filler_distribution,
    prefix_free_cover,
    product_distribution,
    set_mass,
    string_mass,
)
from ensembles.core.transform import Decision, EnsembleStream, IndexMap, SelectionRule
from ensembles.models.errors import (
    BoundViolationError,
    BudgetExhaustedError,
    InjectivityViolationError,
    LengthPreconditionError,
    NotPrefixFreeError,
    StreamExhaustedError,
    UndefinedSelectorError,
    ZeroConditioningError,
)
from ensembles.models.schemas import (
    FubiniReport,
    HitReport,
    IdentityEntry,
    IdentityReport,
    LevelReport,
    RelativeHitReport,
    TestReport,
)
from ensembles.utils.helpers import LAMBDA, Symbol, SymbolString, is_prefix, sorted_strings

LevelSource = Union[Mapping[int, Iterable[Sequence[Symbol]]], Callable[[int], Iterable[Sequence[Symbol]]]]


class MLTest:
    """Levels C_1, C_2, ... materialized on demand within a size budget."""

    __test__ = False

    def __init__(self, distribution: DiscreteDistribution, levels: LevelSource,
                 name: str = "test", size_budget: Optional[int] = None):
        self.distribution = distribution
        self.name = name
        self.size_budget = size_budget or settings.level_size_budget
        self._source = levels
        self._cache: Dict[int, PrefixFreeSet] = {}

    def _generate(self, n: int) -> Iterable[Sequence[Symbol]]:
        if callable(self._source):
            return self._source(n)
        return self._source.get(n, ())

    def raw_level(self, n: int) -> List[SymbolString]:
        if n < 1:
            raise ValueError("test levels start at 1")
        strings = []
        for string in self._generate(n):
            strings.append(tuple(string))
            if len(strings) > self.size_budget:
                raise BudgetExhaustedError(f"materializing level {n} of {self.name}", len(strings), self.size_budget)
        return strings

    def level(self, n: int) -> PrefixFreeSet:
        if n not in self._cache:
            self._cache[n] = PrefixFreeSet(self.raw_level(n), self.distribution.alphabet)
            logger.debug(f"{self.name}: level {n} has {len(self._cache[n])} strings")
        return self._cache[n]


def verify_test(T: MLTest, up_to_level: int, strict: bool = False) -> TestReport:
    """Check prefix-freeness and lambda_P(C_n) < 2^-n for n = 1..up_to_level."""
    rows = []
    for n in range(1, up_to_level + 1):
        raw = T.raw_level(n)
        try:
            members = T.level(n)
            prefix_free = True
        except NotPrefixFreeError:
            members = prefix_free_cover(raw)
            prefix_free = False
        mass = set_mass(T.distribution, members)
        bound = Fraction(1, 2 ** n)
        rows.append(LevelReport(level=n, size=len(raw), prefix_free=prefix_free, mass=mass, bound=bound,
                                margin=bound - mass, passed=prefix_free and mass < bound))
    report = TestReport(
        distribution=T.distribution.describe(),
        levels=rows,
        passed=all(row.passed for row in rows),
        budgets={"up_to_level": up_to_level, "level_size": T.size_budget},
    )
    if strict:
        raise_for_violation(report)
    return report


def raise_for_violation(report: TestReport) -> None:
    violation = report.first_violation
    if violation is not None:
        raise BoundViolationError(violation.level, violation.mass)


def _read(alpha: EnsembleStream, depth: int) -> SymbolString:
    return tuple(islice(alpha.clone(), depth))


def _first_hit(members: PrefixFreeSet, prefix: SymbolString) -> Optional[SymbolString]:
    for string in members:
        if is_prefix(string, prefix):
            return string
    return None


def prefix_hits(alpha: EnsembleStream, T: MLTest, level: int, depth: int) -> HitReport:
    """Does some member of C_level prefix alpha restricted to depth?"""
    witness = _first_hit(T.level(level), _read(alpha, depth))
    return HitReport(hit=witness is not None, witness=witness)


def zero_probability_test(P: DiscreteDistribution, symbol: Symbol, width: Optional[int] = None,
                          depth: int = 4) -> MLTest:
    """C_n = {rho a : |rho| < depth, rho avoids a} over the first `width` symbols.

    Every level carries mass P(a) * (something <= depth), hence 0 when P(a) = 0.
    """
    others = [s for s in P.alphabet.first(width or settings.default_truncation_width) if s != symbol]

    def levels(n: int) -> Iterable[SymbolString]:
        for length in range(depth):
            for rho in product(others, repeat=length):
                yield rho + (symbol,)

    return MLTest(P, levels, name=f"zero[{symbol}]")


def from_open_sets(P: DiscreteDistribution, levels: LevelSource, name: str = "open-sets") -> MLTest:
    """A test from arbitrary finite generators; each level is replaced by its prefix-free cover."""
    raw = MLTest(P, levels, name=name)
    return MLTest(P, lambda n: prefix_free_cover(raw.raw_level(n)), name=name)


# Pullbacks

@dataclass(frozen=True)
class Pulled:
    strings: Tuple[SymbolString, ...]
    target: Fraction
    residual: Fraction


class PulledBackTest(MLTest):
    """D_n = union of F(sigma) over sigma in C_n of a source test.

    `relation` is "equal" when lambda(F(sigma)) should equal the target up to
    the residual, "at_most" when only lambda(F(sigma)) <= target is claimed.
    """

    def __init__(self, source: MLTest, distribution: DiscreteDistribution,
                 pull: Callable[[SymbolString], Pulled], relation: str, name: str):
        self.source = source
        self.relation = relation
        self._pull = pull
        self._pulled: Dict[SymbolString, Pulled] = {}
        super().__init__(distribution, self._union, name=name, size_budget=source.size_budget)

    def pulled(self, sigma: SymbolString) -> Pulled:
        if sigma not in self._pulled:
            self._pulled[sigma] = self._pull(sigma)
        return self._pulled[sigma]

    def _union(self, n: int) -> PrefixFreeSet:
        strings: List[SymbolString] = []
        for sigma in self.source.level(n):
            strings.extend(self.pulled(sigma).strings)
        return prefix_free_cover(strings)

    def identity_report(self, level: int) -> IdentityReport:
        entries = []
        for sigma in self.source.level(level):
            pulled = self.pulled(sigma)
            mass = set_mass(self.distribution, prefix_free_cover(pulled.strings))
            if self.relation == "at_most":
                holds = mass <= pulled.target
            else:
                holds = mass <= pulled.target <= mass + pulled.residual
            entries.append(IdentityEntry(string=sigma, truncated_mass=mass, target_mass=pulled.target,
                                         residual=pulled.residual, holds=holds))
        return IdentityReport(level=level, relation=self.relation, entries=entries,
                              holds=all(e.holds for e in entries))


def _symbols_for(P: DiscreteDistribution, width: Optional[int]) -> List[Symbol]:
    if width is None:
        width = P.support_size or settings.default_truncation_width
    return P.alphabet.first(width)


def _check_size(count: int, what: str) -> None:
    if count > settings.level_size_budget:
        raise BudgetExhaustedError(what, count, settings.level_size_budget)


def shuffle_pullback(T: MLTest, f: IndexMap, depth: int, width: Optional[int] = None) -> PulledBackTest:
    """F(sigma): strings tau of length max f(1..|sigma|) with tau(f(k)) = sigma(k).

    Free positions range over the first `width` symbols; the residual covers
    the mass they leave out.
    """
    P = T.distribution
    free_symbols = _symbols_for(P, width)
    kept = P.partial_sum(len(free_symbols))

    def pull(sigma: SymbolString) -> Pulled:
        if not sigma:
            return Pulled((LAMBDA,), Fraction(1), Fraction(0))
        images = [f(k) for k in range(1, len(sigma) + 1)]
        seen: Dict[int, int] = {}
        for k, j in enumerate(images, start=1):
            if j in seen:
                raise InjectivityViolationError(seen[j], k, j)
            seen[j] = k
        length = max(images)
        if length > depth:
            raise BudgetExhaustedError(f"shuffle pullback of {list(sigma)}", length, depth)
        free = length - len(sigma)
        _check_size(len(free_symbols) ** free, f"shuffle pullback of {list(sigma)}")
        fixed = {j - 1: s for j, s in zip(images, sigma)}
        free_positions = [i for i in range(length) if i not in fixed]
        strings = []
        for filling in product(free_symbols, repeat=free):
            tau = dict(fixed)
            tau.update(zip(free_positions, filling))
            strings.append(tuple(tau[i] for i in range(length)))
        target = string_mass(P, sigma)
        residual = target * (1 - kept ** free)
        return Pulled(tuple(strings), target, residual)

    return PulledBackTest(T, P, pull, "equal", name=f"shuffle[{f.name}]({T.name})")


def selection_pullback(T: MLTest, rule: SelectionRule, depth: int, width: Optional[int] = None) -> PulledBackTest:
    """F(sigma): minimal tau with |tau| <= depth from which the rule selects exactly sigma."""
    P = T.distribution
    symbols = _symbols_for(P, width)

    def pull(sigma: SymbolString) -> Pulled:
        target = string_mass(P, sigma)
        if not sigma:
            return Pulled((LAMBDA,), target, Fraction(0))
        found: List[SymbolString] = []
        stack: List[Tuple[SymbolString, int]] = [(LAMBDA, 0)]
        visited = 0
        while stack:
            tau, chosen = stack.pop()
            visited += 1
            _check_size(visited, f"selection pullback of {list(sigma)}")
            if len(tau) >= depth:
                continue
            decision = rule.decide(list(tau))
            if decision is Decision.UNDEFINED:
                raise UndefinedSelectorError(rule.name, len(tau))
            if decision is Decision.YES:
                extended = tau + (sigma[chosen],)
                if chosen + 1 == len(sigma):
                    found.append(extended)
                else:
                    stack.append((extended, chosen + 1))
            else:
                stack.extend((tau + (a,), chosen) for a in reversed(symbols))
        return Pulled(tuple(sorted_strings(found, P.alphabet)), target, Fraction(0))

    return PulledBackTest(T, P, pull, "at_most", name=f"select[{rule.name}]({T.name})")


def least_outside(P: DiscreteDistribution, event: EventPredicate) -> Optional[Symbol]:
    """The least-index symbol of P's alphabet outside B, None if B is everything scanned."""
    limit = P.alphabet.size if P.alphabet.size is not None else settings.scan_budget
    for index in range(limit):
        symbol = P.alphabet.enumerate(index)
        if not event.member(symbol):
            return symbol
    return None


def conditioning_pullback(T: MLTest, event: EventPredicate, K: int, filler: Optional[Symbol] = None,
                          base: Optional[DiscreteDistribution] = None) -> PulledBackTest:
    """T tests P_B-ensembles; the pulled test lives on Q, the contraction of P that
    sends everything outside B to the filler a, with Q(a) = 1 - P(B).

    F(sigma) = { a^k1 sigma_1 ... a^kL sigma_L : 0 <= k_i <= K }, whose full
    (untruncated) Q-mass is P(sigma) / P(B)^L = P_B(sigma).
    """
    P = base or (T.distribution.base if isinstance(T.distribution, ConditionalDistribution) else None)
    if P is None:
        raise ValueError("conditioning pullback needs the unconditioned distribution")
    mass = P.event_mass(event)
    if mass.value == 0:
        raise ZeroConditioningError(event.name)
    p_b = mass.value if mass.exact else mass.upper
    q = 1 - p_b
    if filler is None and q != 0:
        filler = least_outside(P, event)
    collapse = q == 0 or filler is None
    Q = P if filler is None else filler_distribution(P, event, filler)

    def pull(sigma: SymbolString) -> Pulled:
        length = len(sigma)
        target = string_mass(P, sigma) / p_b ** length
        if collapse:
            return Pulled((sigma,), target, Fraction(0))
        _check_size((K + 1) ** length, f"conditioning pullback of {list(sigma)}")
        strings = []
        for gaps in product(range(K + 1), repeat=length):
            tau: List[Symbol] = []
            for gap, symbol in zip(gaps, sigma):
                tau.extend([filler] * gap)
                tau.append(symbol)
            strings.append(tuple(tau))
        # sum over gaps <= K of q^k is (1 - q^(K+1)) / (1 - q)
        residual = target * (1 - (1 - q ** (K + 1)) ** length)
        return Pulled(tuple(strings), target, residual)

    return PulledBackTest(T, Q, pull, "equal", name=f"condition[{event.name},K={K}]({T.name})")


def map_pullback(T: MLTest, variable: RandomVariable, depth: int,
                 base: Optional[DiscreteDistribution] = None) -> PulledBackTest:
    """F(sigma) = { tau : X(tau(k)) = sigma(k) } with tau over the first `depth` domain symbols."""
    P = base or (T.distribution.base if isinstance(T.distribution, PushforwardDistribution) else None)
    if P is None:
        raise ValueError("map pullback needs the domain distribution")
    domain_symbols = _symbols_for(P, depth)
    tail = P.tail_bound(len(domain_symbols))
    preimages: Dict[Symbol, List[Symbol]] = {}
    for a in domain_symbols:
        preimages.setdefault(variable.apply(a), []).append(a)

    def pull(sigma: SymbolString) -> Pulled:
        choices = [preimages.get(x, []) for x in sigma]
        count = 1
        for options in choices:
            count *= len(options)
        _check_size(count, f"map pullback of {list(sigma)}")
        target = string_mass(T.distribution, sigma)
        return Pulled(tuple(product(*choices)), target, len(sigma) * tail)

    return PulledBackTest(T, P, pull, "equal", name=f"map[{variable.name}]({T.name})")


def marginal_pullback(T: MLTest, first: DiscreteDistribution, depth: int) -> PulledBackTest:
    """Lift a test on the second coordinate to the product space:
    F(sigma_2) = { sigma_1 x sigma_2 : |sigma_1| = |sigma_2| }, sigma_1 over the first `depth` symbols."""
    P2 = T.distribution
    joint = product_distribution(first, P2)
    symbols = _symbols_for(first, depth)
    kept = first.partial_sum(len(symbols))

    def pull(sigma: SymbolString) -> Pulled:
        length = len(sigma)
        _check_size(len(symbols) ** length, f"marginal pullback of {list(sigma)}")
        strings = [tuple(zip(left, sigma)) for left in product(symbols, repeat=length)]
        target = string_mass(P2, sigma)
        return Pulled(tuple(strings), target, target * (1 - kept ** length))

    return PulledBackTest(T, joint, pull, "equal", name=f"marginal({T.name})")


def check_fubini_slice(P1: DiscreteDistribution, P2: DiscreteDistribution,
                       W: Iterable[Sequence[Tuple[Symbol, Symbol]]], x: Sequence[Symbol]) -> FubiniReport:
    """P1(F(W, x)) P2(x) against lambda_{P1 x P2}([[W]] & [empty x x]).

    F(W, x) holds the first components sigma_1 of the members sigma_1 x sigma_2
    of W whose second component prefixes x.
    """
    x = tuple(x)
    members = PrefixFreeSet(W)
    for w in members:
        if len(w) > len(x):
            raise LengthPreconditionError(f"member {list(w)} is longer than x = {list(x)}")
    slice_strings = [tuple(a for a, _ in w) for w in members if is_prefix(tuple(b for _, b in w), x)]
    lhs = set_mass(P1, slice_strings) * string_mass(P2, x)
    joint = product_distribution(P1, P2)
    rhs = Fraction(0)
    for w in members:
        second = tuple(b for _, b in w)
        if is_prefix(second, x):
            # [[w]] & [empty x x] is the cylinder of w with the rest of x on the second coordinate
            rhs += string_mass(joint, w) * string_mass(P2, x[len(w):])
    return FubiniReport(lhs=lhs, rhs=rhs, equal=lhs == rhs)


# Relative tests

class OracleContext:
    """Finite, logged access to oracle streams beta_1, ..., beta_l (positions are 1-based)."""

    def __init__(self, oracles: Sequence[EnsembleStream], budget: Optional[int] = None):
        self.oracles = list(oracles)
        self.budget = budget or settings.oracle_query_budget
        self._sources = [o.clone() for o in self.oracles]
        self._buffers: List[List[Symbol]] = [[] for _ in self.oracles]
        self._log: Dict[int, Set[int]] = {}
        self.queries = 0

    def query(self, k: int, position: int) -> Symbol:
        if position < 1:
            raise ValueError("oracle positions start at 1")
        self.queries += 1
        if self.queries > self.budget:
            raise BudgetExhaustedError("oracle queries", self.queries, self.budget)
        buffer = self._buffers[k]
        while len(buffer) < position:
            try:
                buffer.append(next(self._sources[k]))
            except StopIteration:
                raise StreamExhaustedError(position, len(buffer))
        self._log.setdefault(k, set()).add(position)
        return buffer[position - 1]

    def prefix(self, k: int, n: int) -> SymbolString:
        return tuple(self.query(k, i) for i in range(1, n + 1))

    @property
    def positions_read(self) -> Dict[int, List[int]]:
        return {k: sorted(v) for k, v in sorted(self._log.items())}


class RelativeMLTest(MLTest):
    """A test whose level generator may read oracle positions through a context."""

    def __init__(self, distribution: DiscreteDistribution,
                 generator: Callable[[int, OracleContext], Iterable[Sequence[Symbol]]],
                 context: OracleContext, name: str = "relative-test"):
        self.context = context
        super().__init__(distribution, lambda n: generator(n, context), name=name)


def evaluate_relative_test(T: MLTest, alpha: EnsembleStream, level: int, depth: int) -> RelativeHitReport:
    hit = prefix_hits(alpha, T, level, depth)
    context = getattr(T, "context", None)
    positions = context.positions_read if context is not None else {}
    return RelativeHitReport(hit=hit.hit, witness=hit.witness, oracle_positions_read=positions)
