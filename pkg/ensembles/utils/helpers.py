from fractions import Fraction
from typing import Hashable, Iterable, Sequence, Tuple, Union

Symbol = Hashable
SymbolString = Tuple[Symbol, ...]

LAMBDA: SymbolString = ()
LAMBDA_TOKEN = "λ"


def parse_rational(text: Union[str, int]) -> Fraction:
    """Parse "num/den" or an integer literal. Decimals are rejected."""
    if isinstance(text, int):
        return Fraction(text)
    cleaned = str(text).strip()
    if not cleaned or any(ch in cleaned for ch in ".eE"):
        raise ValueError(f"not a decimal-free rational: {text!r}")
    return Fraction(cleaned)


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_symbol(text: str) -> Symbol:
    """'3' -> 3, '3,4' -> (3, 4)."""
    parts = [p.strip() for p in text.strip().split(",")]
    if len(parts) == 1:
        return int(parts[0])
    return tuple(int(p) for p in parts)


def format_symbol(symbol: Symbol) -> str:
    if isinstance(symbol, tuple):
        return ",".join(format_symbol(s) for s in symbol)
    return str(symbol)


def parse_string(text: str) -> SymbolString:
    """Whitespace-separated symbols; the empty text or a lone λ is the empty string."""
    if text.strip() == LAMBDA_TOKEN:
        return LAMBDA
    return tuple(parse_symbol(tok) for tok in text.split())


def format_string(string: Sequence[Symbol]) -> str:
    if not string:
        return LAMBDA_TOKEN
    return " ".join(format_symbol(s) for s in string)


def is_prefix(prefix: Sequence[Symbol], string: Sequence[Symbol]) -> bool:
    return len(prefix) <= len(string) and tuple(string[: len(prefix)]) == tuple(prefix)


def _value_key(symbol: Symbol):
    if isinstance(symbol, int) and not isinstance(symbol, bool):
        return (0, symbol, "")
    if isinstance(symbol, tuple):
        return (1, "tuple", tuple(_value_key(s) for s in symbol))
    return (1, type(symbol).__name__, repr(symbol))


def string_sort_key(string: Sequence[Symbol], alphabet=None):
    """(length, enumeration indices) when an alphabet is given; symbols outside it,
    or strings without an alphabet, fall back to a type-safe value order."""
    if alphabet is None:
        return (len(string), tuple((1, _value_key(s)) for s in string))
    return (len(string), tuple((0, alphabet.index_of(s)) if alphabet.contains(s) else (1, _value_key(s))
                               for s in string))


def sorted_strings(strings: Iterable[SymbolString], alphabet=None) -> list:
    return sorted(strings, key=lambda s: string_sort_key(s, alphabet))
