"""Countable alphabets: an injective enumeration plus a membership decider."""
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Dict, Iterator, List, Optional, Sequence

from ensembles.config import settings
from ensembles.models.errors import BudgetExhaustedError, ForeignSymbolError
from ensembles.utils.helpers import Symbol

if TYPE_CHECKING:
    from ensembles.core.events import EventPredicate


class CountableAlphabet(ABC):
    """Enumerated symbol universe. `size` is None for infinite alphabets."""

    label: str = "alphabet"
    size: Optional[int] = None

    @abstractmethod
    def enumerate(self, index: int) -> Symbol:
        """Return the symbol with the given index; IndexError past a finite end."""

    @abstractmethod
    def contains(self, symbol: Symbol) -> bool:
        ...

    @abstractmethod
    def index_of(self, symbol: Symbol) -> int:
        ...

    @property
    def is_finite(self) -> bool:
        return self.size is not None

    @property
    def universe(self) -> "CountableAlphabet":
        """The ambient alphabet; sub-alphabets report their root parent."""
        return self

    def first(self, m: int) -> List[Symbol]:
        """The first m symbols in enumeration order (fewer for small finite alphabets)."""
        limit = m if self.size is None else min(m, self.size)
        return [self.enumerate(i) for i in range(limit)]

    def require(self, symbol: Symbol) -> Symbol:
        if not self.contains(symbol):
            raise ForeignSymbolError(symbol, self.label)
        return symbol

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class NaturalAlphabet(CountableAlphabet):
    """The naturals 0, 1, 2, ... enumerated by themselves."""

    def __init__(self, label: str = "N"):
        self.label = label
        self.size = None

    def enumerate(self, index: int) -> Symbol:
        if index < 0:
            raise IndexError(index)
        return index

    def contains(self, symbol: Symbol) -> bool:
        return isinstance(symbol, int) and not isinstance(symbol, bool) and symbol >= 0

    def index_of(self, symbol: Symbol) -> int:
        return self.require(symbol)

    def __eq__(self, other) -> bool:
        return isinstance(other, NaturalAlphabet)

    def __hash__(self) -> int:
        return hash(NaturalAlphabet)


class FiniteAlphabet(CountableAlphabet):
    def __init__(self, symbols: Sequence[Symbol], label: Optional[str] = None):
        self.symbols = tuple(symbols)
        self._index = {s: i for i, s in enumerate(self.symbols)}
        if len(self._index) != len(self.symbols):
            raise ValueError("finite alphabet symbols must be distinct")
        self.size = len(self.symbols)
        self.label = label or "{" + ",".join(map(str, self.symbols)) + "}"

    def enumerate(self, index: int) -> Symbol:
        if index < 0:
            raise IndexError(index)
        return self.symbols[index]

    def contains(self, symbol: Symbol) -> bool:
        try:
            return symbol in self._index
        except TypeError:
            return False

    def index_of(self, symbol: Symbol) -> int:
        self.require(symbol)
        return self._index[symbol]

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteAlphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)


BINARY = FiniteAlphabet((0, 1), label="{0,1}")


class SubAlphabet(CountableAlphabet):
    """The members of an event B inside a parent alphabet, in the parent's order."""

    def __init__(self, parent: CountableAlphabet, event: "EventPredicate", label: Optional[str] = None):
        self.parent = parent
        self.event = event
        self.label = label or f"{parent.label}|{event.name}"
        self._members: List[Symbol] = []
        self._positions: Dict[Symbol, int] = {}
        self._scanned = 0
        self._exhausted = False
        if event.members is not None:
            members = [s for s in event.members if parent.contains(s)]
            members.sort(key=parent.index_of)
            self._members = members
            self._positions = {s: i for i, s in enumerate(members)}
            self._exhausted = True
            self.size = len(members)
        elif parent.size is not None:
            self._scan_until(lambda: False)
            self.size = len(self._members)
        else:
            self.size = None

    def _scan_until(self, done, budget: Optional[int] = None) -> None:
        budget = budget or settings.scan_budget
        steps = 0
        while not self._exhausted and not done():
            if self.parent.size is not None and self._scanned >= self.parent.size:
                self._exhausted = True
                break
            symbol = self.parent.enumerate(self._scanned)
            self._scanned += 1
            steps += 1
            if self.event.member(symbol):
                self._positions[symbol] = len(self._members)
                self._members.append(symbol)
            if steps > budget:
                raise BudgetExhaustedError(f"enumerating {self.label}", steps, budget)

    def enumerate(self, index: int) -> Symbol:
        if index < 0:
            raise IndexError(index)
        self._scan_until(lambda: len(self._members) > index)
        if index >= len(self._members):
            raise IndexError(index)
        return self._members[index]

    @property
    def universe(self) -> CountableAlphabet:
        return self.parent.universe

    def contains(self, symbol: Symbol) -> bool:
        return self.parent.contains(symbol) and self.event.member(symbol)

    def index_of(self, symbol: Symbol) -> int:
        self.require(symbol)
        target = self.parent.index_of(symbol)
        self._scan_until(lambda: self._scanned > target)
        return self._positions[symbol]


def _diagonal_bounds(t: int, left: Optional[int], right: Optional[int]):
    lo = 0 if right is None else max(0, t - (right - 1))
    hi = t if left is None else min(t, left - 1)
    return lo, hi


class ProductAlphabet(CountableAlphabet):
    """Cartesian product enumerated by Cantor diagonal pairing.

    Pairs (i, j) of factor indices are ordered by (i + j, i); pairs outside a
    finite factor are skipped. More than two factors fold to the left and the
    symbols are flattened to n-tuples.
    """

    def __init__(self, factors: Sequence[CountableAlphabet]):
        if len(factors) < 2:
            raise ValueError("a product alphabet needs at least two factors")
        self.factors = tuple(factors)
        self.arity = len(self.factors)
        self._left = self.factors[0] if self.arity == 2 else ProductAlphabet(self.factors[:-1])
        self._right = self.factors[-1]
        self.label = "x".join(f.label for f in self.factors)
        if self._left.size is not None and self._right.size is not None:
            self.size = self._left.size * self._right.size
        else:
            self.size = None
        self._cache: List[Symbol] = []
        self._walker = self._walk()

    def __eq__(self, other) -> bool:
        return isinstance(other, ProductAlphabet) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def _join(self, left: Symbol, right: Symbol) -> Symbol:
        if self.arity == 2:
            return (left, right)
        return (*left, right)

    def _split(self, symbol: Symbol):
        if self.arity == 2:
            return symbol[0], symbol[1]
        return tuple(symbol[:-1]), symbol[-1]

    def _walk(self) -> Iterator[Symbol]:
        lsize, rsize = self._left.size, self._right.size
        t = 0
        while True:
            lo, hi = _diagonal_bounds(t, lsize, rsize)
            if lo > hi and lsize is not None and rsize is not None and t > lsize + rsize:
                return
            for i in range(lo, hi + 1):
                yield self._join(self._left.enumerate(i), self._right.enumerate(t - i))
            t += 1

    def enumerate(self, index: int) -> Symbol:
        if index < 0 or (self.size is not None and index >= self.size):
            raise IndexError(index)
        while len(self._cache) <= index:
            self._cache.append(next(self._walker))
        return self._cache[index]

    def first(self, m: int) -> List[Symbol]:
        limit = m if self.size is None else min(m, self.size)
        if limit > 0:
            self.enumerate(limit - 1)
        return list(self._cache[:limit])

    def contains(self, symbol: Symbol) -> bool:
        if not isinstance(symbol, tuple) or len(symbol) != self.arity:
            return False
        return all(f.contains(s) for f, s in zip(self.factors, symbol))

    def index_of(self, symbol: Symbol) -> int:
        self.require(symbol)
        left, right = self._split(symbol)
        i = self._left.index_of(left)
        j = self._right.index_of(right)
        t = i + j
        lsize, rsize = self._left.size, self._right.size
        if lsize is None and rsize is None:
            before = t * (t + 1) // 2
        else:
            before = 0
            for s in range(t):
                lo, hi = _diagonal_bounds(s, lsize, rsize)
                before += max(0, hi - lo + 1)
        lo, _ = _diagonal_bounds(t, lsize, rsize)
        return before + (i - lo)

