"""Discrete probability spaces over countable alphabets and the generalized
Bernoulli measure of cylinder sets.

Masses are exact `Fraction`s. A distribution over an infinite alphabet carries a
certified `tail_bound(m)`: an upper bound on the mass of every symbol with
enumeration index >= m. Families with a closed form (geometric, finite tables)
report it directly; derived distributions fall back to `1 - partial_sum(m)`,
which stays an upper bound whenever the listed masses are exact or lower
bounds of a sub-probability.
"""
import math
from abc import ABC, abstractmethod
from fractions import Fraction
from functools import reduce
from itertools import combinations, product
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from ensembles.config import settings
from ensembles.core.alphabet import CountableAlphabet, NaturalAlphabet, ProductAlphabet, SubAlphabet
from ensembles.core.events import EventMass, EventPredicate, RandomVariable, intersection, product_variable, singleton, union
from ensembles.models.errors import BudgetExhaustedError, NotPrefixFreeError, ZeroConditioningError
from ensembles.utils.helpers import LAMBDA, Symbol, SymbolString, format_rational, sorted_strings


def truncation_epsilon() -> Fraction:
    return Fraction(1, 2 ** settings.truncation_epsilon_exponent)


class DiscreteDistribution(ABC):
    """A probability mass function P over a countable alphabet."""

    family: str = "abstract"
    alphabet: CountableAlphabet

    def __init__(self, alphabet: CountableAlphabet):
        self.alphabet = alphabet
        self._cumulative: List[Fraction] = [Fraction(0)]

    @abstractmethod
    def _mass(self, symbol: Symbol) -> Fraction:
        """Mass of a symbol already known to belong to the alphabet."""

    def mass(self, symbol: Symbol) -> Fraction:
        self.alphabet.require(symbol)
        return self._mass(symbol)

    def mass_at(self, index: int) -> Fraction:
        return self._mass(self.alphabet.enumerate(index))

    def float_mass_at(self, index: int) -> float:
        return float(self.mass_at(index))

    @property
    def support_size(self) -> Optional[int]:
        """Number of leading indices that carry all the mass, or None if unbounded."""
        return None

    @property
    def support_kind(self) -> str:
        return "finite" if self.support_size is not None else "analytic"

    def partial_sum(self, m: int) -> Fraction:
        """Sum of the masses of indices < m."""
        if self.alphabet.size is not None:
            m = min(m, self.alphabet.size)
        while len(self._cumulative) <= m:
            index = len(self._cumulative) - 1
            self._cumulative.append(self._cumulative[-1] + self.mass_at(index))
        return self._cumulative[m]

    def tail_bound(self, m: int) -> Fraction:
        if self.support_size is not None and m >= self.support_size:
            return Fraction(0)
        return max(Fraction(0), 1 - self.partial_sum(m))

    def depth_for(self, epsilon: Fraction) -> int:
        """Least m (searched by doubling then bisection) with tail_bound(m) < epsilon."""
        if self.support_size is not None:
            return max(1, self.support_size)
        hi = 1
        while self.tail_bound(hi) >= epsilon:
            hi *= 2
            if hi > settings.max_sampling_width:
                raise BudgetExhaustedError(f"depth for tail < {format_rational(epsilon)}", hi, settings.max_sampling_width)
        lo = hi // 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.tail_bound(mid) < epsilon:
                hi = mid
            else:
                lo = mid
        return hi

    def event_mass(self, event: EventPredicate) -> EventMass:
        """P(B): exact when the event is finite, has a closed form or P has finite
        support; otherwise a partial sum with the tail bound as slack."""
        if event.certified_mass is not None:
            return event.certified_mass
        if event.members is not None:
            return EventMass(sum((self._mass(s) for s in event.members if self.alphabet.contains(s)), Fraction(0)))
        if event.closed_form is not None:
            value = event.closed_form(self)
            if value is not None:
                return EventMass(Fraction(value))
        depth = self.support_size
        exact = depth is not None
        if not exact:
            depth = self.depth_for(truncation_epsilon())
        value = sum((self._mass(s) for s in self.alphabet.first(depth) if event.member(s)), Fraction(0))
        slack = Fraction(0) if exact else self.tail_bound(depth)
        logger.debug(f"P({event.name}) bracketed over {depth} symbols: {value} + {slack}")
        return EventMass(value, slack)

    def approximate(self, symbol: Symbol, k: int) -> Fraction:
        """Dyadic g with |P(a) - g| <= 2^-k."""
        scale = 2 ** k
        return Fraction(math.floor(self.mass(symbol) * scale), scale)

    def describe(self) -> str:
        return self.family

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.describe()}>"


class GeometricDistribution(DiscreteDistribution):
    """P(n) = p (1-p)^n on the naturals."""

    family = "geometric"

    def __init__(self, p: Fraction):
        p = Fraction(p)
        if not 0 < p <= 1:
            raise ValueError(f"geometric parameter must lie in (0, 1], got {p}")
        super().__init__(NaturalAlphabet())
        self.p = p
        self.q = 1 - p

    def _mass(self, symbol: Symbol) -> Fraction:
        return self.p * self.q ** symbol

    @property
    def support_size(self) -> Optional[int]:
        return 1 if self.q == 0 else None

    def float_mass_at(self, index: int) -> float:
        return float(self.p) * float(self.q) ** index

    def partial_sum(self, m: int) -> Fraction:
        return 1 - self.q ** m

    def tail_bound(self, m: int) -> Fraction:
        return self.q ** m

    def depth_for(self, epsilon: Fraction) -> int:
        if self.q == 0:
            return 1
        m = max(1, math.ceil(math.log(float(epsilon)) / math.log(float(self.q))))
        while self.q ** m >= epsilon:
            m += 1
        while m > 1 and self.q ** (m - 1) < epsilon:
            m -= 1
        return m

    def describe(self) -> str:
        return f"geometric(p={format_rational(self.p)})"


class FiniteDistribution(DiscreteDistribution):
    """A user table of masses; every symbol outside the table has mass 0."""

    family = "table"

    def __init__(self, masses: Mapping[Symbol, Fraction], alphabet: Optional[CountableAlphabet] = None):
        super().__init__(alphabet or NaturalAlphabet())
        self.masses: Dict[Symbol, Fraction] = {}
        for symbol, value in masses.items():
            self.alphabet.require(symbol)
            value = Fraction(value)
            if value < 0:
                raise ValueError(f"negative mass {value} for symbol {symbol!r}")
            self.masses[symbol] = value
        total = sum(self.masses.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"masses must sum to 1, got {format_rational(total)}")
        supported = [self.alphabet.index_of(s) for s, v in self.masses.items() if v > 0]
        self._support_size = max(supported) + 1

    def _mass(self, symbol: Symbol) -> Fraction:
        return self.masses.get(symbol, Fraction(0))

    @property
    def support_size(self) -> Optional[int]:
        return self._support_size

    def describe(self) -> str:
        body = ",".join(f"{s}:{format_rational(v)}" for s, v in self.masses.items())
        return f"table({body})"


def point_mass(symbol: Symbol, alphabet: Optional[CountableAlphabet] = None) -> FiniteDistribution:
    return FiniteDistribution({symbol: Fraction(1)}, alphabet)


class ConditionalDistribution(DiscreteDistribution):
    """P_B(a) = P(a) / P(B) on the sub-alphabet B."""

    family = "conditional"

    def __init__(self, base: DiscreteDistribution, event: EventPredicate, normalizer: EventMass):
        super().__init__(SubAlphabet(base.alphabet, event))
        self.base = base
        self.event = event
        self.normalizer = normalizer
        # a bracketed P(B) normalizes by its upper end so masses stay lower bounds
        self._scale = normalizer.value if normalizer.exact else normalizer.upper

    def _mass(self, symbol: Symbol) -> Fraction:
        return self.base._mass(symbol) / self._scale

    @property
    def support_size(self) -> Optional[int]:
        parent_support = self.base.support_size
        if parent_support is None:
            return None
        return sum(1 for s in self.base.alphabet.first(parent_support) if self.event.member(s))

    def describe(self) -> str:
        return f"{self.base.describe()}|{self.event.name}"


class FillerDistribution(DiscreteDistribution):
    """Q on B plus a filler symbol a: Q(a) = 1 - P(B), Q(x) = P(x) for x in B."""

    family = "filler"

    def __init__(self, base: DiscreteDistribution, event: EventPredicate, filler: Symbol):
        if event.member(filler):
            raise ValueError(f"filler {filler!r} must lie outside {event.name}")
        super().__init__(SubAlphabet(base.alphabet, union(event, singleton(filler))))
        self.base = base
        self.event = event
        self.filler = filler
        self.event_mass_of_b = base.event_mass(event)
        if not self.event_mass_of_b.exact:
            logger.warning(f"filler mass for {event.name} uses a bracketed P(B)")

    def _mass(self, symbol: Symbol) -> Fraction:
        if symbol == self.filler:
            return 1 - self.event_mass_of_b.upper
        return self.base._mass(symbol)

    @property
    def support_size(self) -> Optional[int]:
        parent_support = self.base.support_size
        if parent_support is None:
            return None
        limit = max(parent_support, self.base.alphabet.index_of(self.filler) + 1)
        return sum(1 for s in self.base.alphabet.first(limit) if self.alphabet.contains(s))

    def describe(self) -> str:
        return f"filler({self.base.describe()},{self.event.name},{self.filler})"


class PushforwardDistribution(DiscreteDistribution):
    """X(P): mass(x) = P(X = x)."""

    family = "pushforward"

    def __init__(self, base: DiscreteDistribution, variable: RandomVariable):
        super().__init__(variable.codomain)
        self.base = base
        self.variable = variable
        self._table: Optional[Dict[Symbol, Fraction]] = None
        self.exact = True
        if variable.preimage is None:
            self._table = {}
            depth = base.support_size
            if depth is None:
                depth = base.depth_for(truncation_epsilon())
                self.exact = False
                logger.debug(f"pushforward through {variable.name} truncated at {depth} symbols")
            for symbol in base.alphabet.first(depth):
                image = variable.apply(symbol)
                self._table[image] = self._table.get(image, Fraction(0)) + base._mass(symbol)

    def _mass(self, symbol: Symbol) -> Fraction:
        if self._table is not None:
            return self._table.get(symbol, Fraction(0))
        mass = self.base.event_mass(self.variable.level_set(symbol))
        if not mass.exact:
            self.exact = False
        return mass.value

    @property
    def support_size(self) -> Optional[int]:
        if self.alphabet.size is not None:
            return self.alphabet.size
        if self._table is not None and self.exact:
            supported = [self.alphabet.index_of(s) for s, v in self._table.items() if v > 0]
            return max(supported) + 1
        return None

    def describe(self) -> str:
        return f"{self.variable.name}({self.base.describe()})"


class ProductDistribution(DiscreteDistribution):
    """Q(a_1, ..., a_n) = P_1(a_1) ... P_n(a_n) on the diagonally enumerated product."""

    family = "product"

    def __init__(self, factors: Sequence[DiscreteDistribution]):
        if len(factors) < 2:
            raise ValueError("a product distribution needs at least two factors")
        super().__init__(ProductAlphabet([f.alphabet for f in factors]))
        self.factors = tuple(factors)

    def _mass(self, symbol: Symbol) -> Fraction:
        return reduce(lambda acc, pair: acc * pair[0]._mass(pair[1]), zip(self.factors, symbol), Fraction(1))

    @property
    def support_size(self) -> Optional[int]:
        sizes = [f.support_size for f in self.factors]
        if any(s is None for s in sizes):
            return None
        box = [f.alphabet.first(s) for f, s in zip(self.factors, sizes)]
        return max(self.alphabet.index_of(t) for t in product(*box)) + 1

    def describe(self) -> str:
        return "x".join(f.describe() for f in self.factors)


class PrefixFreeSet:
    """A finite set of strings none of which is a proper prefix of another."""

    def __init__(self, strings: Iterable[Sequence[Symbol]] = (), alphabet: Optional[CountableAlphabet] = None):
        members = frozenset(tuple(s) for s in strings)
        for string in sorted_strings(members, alphabet):
            for k in range(len(string)):
                if string[:k] in members:
                    raise NotPrefixFreeError(string[:k], string)
        self.strings = members
        self.alphabet = alphabet

    def __iter__(self) -> Iterator[SymbolString]:
        return iter(sorted_strings(self.strings, self.alphabet))

    def __len__(self) -> int:
        return len(self.strings)

    def __contains__(self, string) -> bool:
        return tuple(string) in self.strings

    def __eq__(self, other) -> bool:
        if isinstance(other, PrefixFreeSet):
            return self.strings == other.strings
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.strings)

    def __repr__(self) -> str:
        return f"PrefixFreeSet({[list(s) for s in self]})"


def as_prefix_free(strings) -> PrefixFreeSet:
    return strings if isinstance(strings, PrefixFreeSet) else PrefixFreeSet(strings)


def string_mass(P: DiscreteDistribution, sigma: Sequence[Symbol]) -> Fraction:
    """P(sigma) = P(sigma_1) ... P(sigma_n); P(lambda) = 1."""
    result = Fraction(1)
    for symbol in sigma:
        result *= P.mass(symbol)
    return result


def set_mass(P: DiscreteDistribution, strings) -> Fraction:
    """lambda_P of the open set generated by a prefix-free set."""
    return sum((string_mass(P, s) for s in as_prefix_free(strings)), Fraction(0))


def cylinder_measure(P: DiscreteDistribution, sigma: Sequence[Symbol]) -> Fraction:
    return string_mass(P, sigma)


def truncate_alphabet(P: DiscreteDistribution, m: int) -> Tuple[List[Symbol], Fraction]:
    """The first m symbols and the certified mass of everything after them."""
    if m < 1:
        raise ValueError("truncation width must be at least 1")
    width = m if P.support_size is None else min(m, P.support_size)
    return P.alphabet.first(width), P.tail_bound(m)


def conditional_distribution(P: DiscreteDistribution, event: EventPredicate,
                             mass: Optional[EventMass] = None) -> ConditionalDistribution:
    mass = mass or P.event_mass(event)
    if mass.value == 0:
        raise ZeroConditioningError(event.name)
    if not mass.exact:
        logger.warning(f"conditioning on {event.name} with bracketed mass "
                       f"[{format_rational(mass.value)}, {format_rational(mass.upper)}]")
    return ConditionalDistribution(P, event, mass)


def filler_distribution(P: DiscreteDistribution, event: EventPredicate, filler: Symbol) -> FillerDistribution:
    return FillerDistribution(P, event, filler)


def pushforward(P: DiscreteDistribution, variable: RandomVariable) -> PushforwardDistribution:
    return PushforwardDistribution(P, variable)


def product_distribution(*factors: DiscreteDistribution) -> ProductDistribution:
    return ProductDistribution(factors)


def prefix_free_cover(strings: Iterable[Sequence[Symbol]],
                      alphabet: Optional[CountableAlphabet] = None) -> PrefixFreeSet:
    """Minimal elements of S: same open set, no prefix pairs."""
    members = {tuple(s) for s in strings}
    if LAMBDA in members:
        return PrefixFreeSet([LAMBDA], alphabet)
    minimal = [s for s in members if not any(s[:k] in members for k in range(1, len(s)))]
    return PrefixFreeSet(minimal, alphabet)


def _intervals_meet(lo_a: Fraction, hi_a: Fraction, lo_b: Fraction, hi_b: Fraction) -> bool:
    return lo_a <= hi_b and lo_b <= hi_a


def _product_bracket(masses: Sequence[EventMass]) -> Tuple[Fraction, Fraction]:
    lo = reduce(lambda acc, m: acc * m.value, masses, Fraction(1))
    hi = reduce(lambda acc, m: acc * min(Fraction(1), m.upper), masses, Fraction(1))
    return lo, hi


def events_independent(P: DiscreteDistribution, events: Sequence[EventPredicate]) -> bool:
    """P(A_i1 & ... & A_ik) = P(A_i1) ... P(A_ik) for every index subset of size >= 2.

    Exact masses are compared with ==; bracketed masses only need overlapping brackets.
    """
    singles = [P.event_mass(e) for e in events]
    for k in range(2, len(events) + 1):
        for chosen in combinations(range(len(events)), k):
            joint = P.event_mass(reduce(intersection, (events[i] for i in chosen)))
            lo, hi = _product_bracket([singles[i] for i in chosen])
            if not _intervals_meet(joint.value, joint.upper, lo, hi):
                logger.debug(f"events {[events[i].name for i in chosen]} dependent: "
                             f"{format_rational(joint.value)} vs {format_rational(lo)}")
                return False
    return True


def variables_independent(P: DiscreteDistribution, variables: Sequence[RandomVariable],
                          width: Optional[int] = None) -> bool:
    """(X_1 x ... x X_n)(P) = X_1(P) x ... x X_n(P) over the first `width` values of each."""
    if len(variables) < 2:
        return True
    width = width or settings.default_truncation_width
    joint_variable = product_variable(variables)
    value_lists = [X.codomain.first(width) for X in variables]
    marginal = [{x: P.event_mass(X.level_set(x)) for x in values} for X, values in zip(variables, value_lists)]
    for combo in product(*value_lists):
        joint = P.event_mass(joint_variable.level_set(combo))
        lo, hi = _product_bracket([marginal[i][x] for i, x in enumerate(combo)])
        if not _intervals_meet(joint.value, joint.upper, lo, hi):
            return False
    return True
