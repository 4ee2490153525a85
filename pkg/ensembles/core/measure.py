"""Measure representations on the Baire space and bounded-depth checks of their
basic properties (restriction bound, covering equality, monotonicity, outer
measure properties) over truncated alphabets."""
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Iterator, List, Sequence

from loguru import logger

from ensembles.core.alphabet import CountableAlphabet
from ensembles.core.space import DiscreteDistribution, PrefixFreeSet, as_prefix_free, prefix_free_cover, string_mass
from ensembles.models.errors import CoverViolationError, InclusionViolationError
from ensembles.models.schemas import CoveringReport, InequalityVerdict, RestrictionBound
from ensembles.utils.helpers import LAMBDA, Symbol, SymbolString, is_prefix


@dataclass(frozen=True)
class MeasureRepresentation:
    """r: strings -> [0, 1] with r(sigma) = sum over a of r(sigma a).

    `consistency_residual(sigma, m)` bounds r(sigma) minus the sum over the
    first m children.
    """

    evaluate: Callable[[SymbolString], Fraction]
    alphabet: CountableAlphabet
    consistency_residual: Callable[[SymbolString, int], Fraction]
    name: str = "r"

    def __call__(self, sigma: Sequence[Symbol]) -> Fraction:
        return self.evaluate(tuple(sigma))

    def of_set(self, strings) -> Fraction:
        return sum((self(s) for s in as_prefix_free(strings)), Fraction(0))

    def children_sum(self, sigma: Sequence[Symbol], m: int) -> Fraction:
        return sum((self(tuple(sigma) + (a,)) for a in self.alphabet.first(m)), Fraction(0))


def from_distribution(P: DiscreteDistribution) -> MeasureRepresentation:
    return MeasureRepresentation(
        evaluate=lambda sigma: string_mass(P, sigma),
        alphabet=P.alphabet,
        consistency_residual=lambda sigma, m: string_mass(P, sigma) * P.tail_bound(m),
        name=f"lambda[{P.describe()}]",
    )


@dataclass(frozen=True)
class RestrictionSet:
    """E[rho]: the members of E having rho as a prefix."""

    base: PrefixFreeSet
    anchor: SymbolString

    @property
    def members(self) -> PrefixFreeSet:
        return PrefixFreeSet(s for s in self.base if is_prefix(self.anchor, s))

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


def restrict(E, rho: Sequence[Symbol]) -> RestrictionSet:
    return RestrictionSet(as_prefix_free(E), tuple(rho))


def check_restriction_bound(r: MeasureRepresentation, E, rho: Sequence[Symbol]) -> RestrictionBound:
    restricted = r.of_set(restrict(E, rho).members)
    anchor = r(rho)
    return RestrictionBound(holds=restricted <= anchor, margin=anchor - restricted,
                            restricted_mass=restricted, anchor_mass=anchor)


def _cover_walk(r: MeasureRepresentation, start: SymbolString, members: PrefixFreeSet, m: int) -> Fraction:
    """Walk the tree below `start` over the first m symbols until every branch
    meets a member. Returns the summed truncation residual of the expanded
    nodes; raises CoverViolationError on a branch no member extends."""
    residual = Fraction(0)
    stack: List[SymbolString] = [start]
    symbols = r.alphabet.first(m)
    while stack:
        node = stack.pop()
        if node in members:
            continue
        if not any(len(s) > len(node) and is_prefix(node, s) for s in members.strings):
            raise CoverViolationError(node)
        residual += r.consistency_residual(node, m)
        stack.extend(node + (a,) for a in reversed(symbols))
    return residual


def check_covering_equality(r: MeasureRepresentation, E, rho: Sequence[Symbol], m: int) -> CoveringReport:
    rho = tuple(rho)
    members = restrict(E, rho).members
    residual = _cover_walk(r, rho, members, m)
    gap = r(rho) - r.of_set(members)
    logger.debug(f"covering check at {list(rho)}: gap {gap}, residual {residual}")
    return CoveringReport(equal_up_to_residual=0 <= gap <= residual, gap=gap, residual=residual)


def open_set_measure(r: MeasureRepresentation, strings: Iterable[Sequence[Symbol]]) -> Fraction:
    """r of the open set generated by any finite S; the cover makes it generator-independent."""
    return r.of_set(prefix_free_cover(strings))


def inclusion_residual(r: MeasureRepresentation, E, F, m: int) -> Fraction:
    """Verify [[E]] within [[F]] over the first m symbols; return the truncation slack."""
    F = as_prefix_free(F)
    residual = Fraction(0)
    for e in as_prefix_free(E):
        if any(is_prefix(f, e) for f in F.strings):
            continue
        try:
            residual += _cover_walk(r, e, F, m)
        except CoverViolationError as exc:
            raise InclusionViolationError(exc.witness) from exc
    return residual


def check_monotonicity(r: MeasureRepresentation, E, F, m: int) -> InequalityVerdict:
    """r(E) <= r(F), exactly. The inclusion residual is reported, never added to r(F)."""
    residual = inclusion_residual(r, E, F, m)
    lhs, rhs = r.of_set(E), r.of_set(F)
    return InequalityVerdict(holds=lhs <= rhs, lhs=lhs, rhs=rhs, residual=residual)


def intersection_cover(first, second) -> PrefixFreeSet:
    """Generator of [[S1]] & [[S2]]: the longer string of every comparable pair."""
    meets = []
    for s in first:
        for t in second:
            if is_prefix(s, t):
                meets.append(tuple(t))
            elif is_prefix(t, s):
                meets.append(tuple(s))
    return prefix_free_cover(meets)


def cylinders_disjoint(first, second) -> bool:
    return len(intersection_cover(first, second)) == 0


def check_subadditivity(r: MeasureRepresentation, family: Sequence[Iterable[Sequence[Symbol]]]) -> InequalityVerdict:
    family = [list(S) for S in family]
    lhs = open_set_measure(r, [s for S in family for s in S])
    rhs = sum((open_set_measure(r, S) for S in family), Fraction(0))
    return InequalityVerdict(holds=lhs <= rhs, lhs=lhs, rhs=rhs)


def check_disjoint_additivity(r: MeasureRepresentation, first, second) -> InequalityVerdict:
    first, second = list(first), list(second)
    if not cylinders_disjoint(first, second):
        raise ValueError("open sets are not disjoint")
    lhs = open_set_measure(r, first + second)
    rhs = open_set_measure(r, first) + open_set_measure(r, second)
    return InequalityVerdict(holds=lhs == rhs, lhs=lhs, rhs=rhs)


def _choices(node: SymbolString, symbols: Sequence[Symbol], depth: int) -> List[tuple]:
    options: List[tuple] = [(), (node,)]
    if depth > 0:
        per_child = [_choices(node + (a,), symbols, depth - 1) for a in symbols]
        for combo in product(*per_child):
            merged = tuple(s for part in combo for s in part)
            if merged:
                options.append(merged)
    return options


def prefix_free_sets(symbols: Sequence[Symbol], depth: int) -> Iterator[PrefixFreeSet]:
    """Every prefix-free set of strings of length <= depth over the given symbols."""
    for choice in _choices(LAMBDA, tuple(symbols), depth):
        yield PrefixFreeSet(choice)
