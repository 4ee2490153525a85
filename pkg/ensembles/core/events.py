"""Events (decidable subsets of an alphabet), their certified masses, and random variables."""
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import TYPE_CHECKING, Callable, Iterable, Optional, Sequence

from ensembles.core.alphabet import BINARY, CountableAlphabet, FiniteAlphabet, NaturalAlphabet, ProductAlphabet, SubAlphabet
from ensembles.utils.helpers import Symbol

if TYPE_CHECKING:
    from ensembles.core.space import DiscreteDistribution


@dataclass(frozen=True)
class EventMass:
    """P(B) as an exact value (slack 0) or a lower bound with P(B) <= value + slack."""

    value: Fraction
    slack: Fraction = Fraction(0)

    @property
    def exact(self) -> bool:
        return self.slack == 0

    @property
    def upper(self) -> Fraction:
        return self.value + self.slack


ClosedForm = Callable[["DiscreteDistribution"], Optional[Fraction]]


@dataclass(frozen=True, eq=False)
class EventPredicate:
    name: str
    member: Callable[[Symbol], bool]
    members: Optional[frozenset] = None
    closed_form: Optional[ClosedForm] = None
    certified_mass: Optional[EventMass] = None

    def __contains__(self, symbol: Symbol) -> bool:
        return self.member(symbol)

    def certified(self, mass: EventMass) -> "EventPredicate":
        """Attach a caller-supplied mass (used when no closed form is registered)."""
        return EventPredicate(self.name, self.member, self.members, self.closed_form, mass)


def whole(name: str = "all") -> EventPredicate:
    return EventPredicate(name, lambda s: True, closed_form=lambda P: Fraction(1))


def empty(name: str = "none") -> EventPredicate:
    return EventPredicate(name, lambda s: False, members=frozenset())


def finite_event(members: Iterable[Symbol], name: Optional[str] = None) -> EventPredicate:
    frozen = frozenset(members)
    label = name or "{" + ",".join(sorted(map(str, frozen))) + "}"
    return EventPredicate(label, frozen.__contains__, members=frozen)


def singleton(symbol: Symbol) -> EventPredicate:
    return finite_event([symbol], name=f"{{{symbol}}}")


def less_than(m: int) -> EventPredicate:
    return finite_event(range(m), name=f"<{m}")


def _geometric_residue(k: int, r: int) -> ClosedForm:
    def closed_form(P: "DiscreteDistribution") -> Optional[Fraction]:
        if getattr(P, "family", None) != "geometric":
            return None
        q = 1 - P.p
        # sum over n = r, r+k, r+2k, ... of p q^n
        return P.p * q ** r / (1 - q ** k)
    return closed_form


def residue_class(k: int, r: int, name: Optional[str] = None) -> EventPredicate:
    """Naturals congruent to r modulo k."""
    if k < 1 or not 0 <= r < k:
        raise ValueError(f"bad residue class {r} mod {k}")
    return EventPredicate(
        name or f"{r}mod{k}",
        lambda s: isinstance(s, int) and s % k == r,
        closed_form=_geometric_residue(k, r),
    )


def even() -> EventPredicate:
    return residue_class(2, 0, name="even")


def odd() -> EventPredicate:
    return residue_class(2, 1, name="odd")


def complement(event: EventPredicate, name: Optional[str] = None) -> EventPredicate:
    def closed_form(P: "DiscreteDistribution") -> Optional[Fraction]:
        mass = P.event_mass(event)
        return 1 - mass.value if mass.exact else None

    return EventPredicate(name or f"not({event.name})", lambda s: not event.member(s), closed_form=closed_form)


def intersection(first: EventPredicate, second: EventPredicate, name: Optional[str] = None) -> EventPredicate:
    label = name or f"{first.name}&{second.name}"
    for finite, other in ((first, second), (second, first)):
        if finite.members is not None:
            return EventPredicate(label, lambda s: first.member(s) and second.member(s),
                                  members=frozenset(s for s in finite.members if other.member(s)))
    return EventPredicate(label, lambda s: first.member(s) and second.member(s))


def union(first: EventPredicate, second: EventPredicate, name: Optional[str] = None) -> EventPredicate:
    members = None
    if first.members is not None and second.members is not None:
        members = first.members | second.members
    return EventPredicate(name or f"{first.name}|{second.name}",
                          lambda s: first.member(s) or second.member(s), members=members)


@dataclass(frozen=True, eq=False)
class RandomVariable:
    """A total map X from a domain alphabet into a codomain alphabet.

    `preimage`, when registered, returns the event {a : X(a) = x} with whatever
    closed form the event carries, so pushforward masses can stay exact.
    """

    name: str
    apply: Callable[[Symbol], Symbol]
    domain: CountableAlphabet
    codomain: CountableAlphabet
    preimage: Optional[Callable[[Symbol], EventPredicate]] = None

    def __call__(self, symbol: Symbol) -> Symbol:
        return self.apply(symbol)

    def level_set(self, value: Symbol) -> EventPredicate:
        if self.preimage is not None:
            return self.preimage(value)
        return EventPredicate(f"{self.name}={value}", lambda a: self.apply(a) == value)


def identity(alphabet: Optional[CountableAlphabet] = None) -> RandomVariable:
    alphabet = alphabet or NaturalAlphabet()
    return RandomVariable("identity", lambda a: a, alphabet, alphabet, preimage=singleton)


def modulo(k: int) -> RandomVariable:
    codomain = FiniteAlphabet(tuple(range(k)))

    def preimage(value: Symbol) -> EventPredicate:
        if not codomain.contains(value):
            return empty()
        return residue_class(k, value)

    return RandomVariable(f"mod{k}", lambda a: a % k, NaturalAlphabet(), codomain, preimage=preimage)


def constant(value: Symbol, domain: Optional[CountableAlphabet] = None) -> RandomVariable:
    return RandomVariable(
        f"const{value}",
        lambda a: value,
        domain or NaturalAlphabet(),
        FiniteAlphabet((value,)),
        preimage=lambda x: whole() if x == value else empty(),
    )


def indicator(event: EventPredicate, domain: Optional[CountableAlphabet] = None) -> RandomVariable:
    """chi_A: 1 on A, 0 elsewhere."""
    return RandomVariable(
        f"chi[{event.name}]",
        lambda a: 1 if event.member(a) else 0,
        domain or NaturalAlphabet(),
        BINARY,
        preimage=lambda x: event if x == 1 else (complement(event) if x == 0 else empty()),
    )


def product_variable(variables: Sequence[RandomVariable]) -> RandomVariable:
    """a -> (X_1(a), ..., X_n(a)) over the product of the codomains."""
    if len(variables) < 2:
        raise ValueError("a product variable needs at least two components")
    codomain = ProductAlphabet([X.codomain for X in variables])

    def preimage(value: Symbol) -> EventPredicate:
        if not codomain.contains(value):
            return empty()
        return reduce(intersection, (X.level_set(x) for X, x in zip(variables, value)))

    return RandomVariable(
        "x".join(X.name for X in variables),
        lambda a: tuple(X.apply(a) for X in variables),
        variables[0].domain,
        codomain,
        preimage=preimage,
    )


def collapse_outside(event: EventPredicate, filler: Symbol,
                     domain: Optional[CountableAlphabet] = None) -> RandomVariable:
    """Keep members of B and send everything else to the filler symbol a."""
    domain = domain or NaturalAlphabet()
    target = union(event, singleton(filler))

    def preimage(value: Symbol) -> EventPredicate:
        if value == filler and not event.member(filler):
            return complement(event)
        return singleton(value) if event.member(value) else empty()

    return RandomVariable(
        f"collapse[{event.name}->{filler}]",
        lambda a: a if event.member(a) else filler,
        domain,
        SubAlphabet(domain, target),
        preimage=preimage,
    )
