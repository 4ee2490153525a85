from typing import Any, Optional, Sequence


class EnsembleError(Exception):
    """Base class for every error raised by the library."""


class ForeignSymbolError(EnsembleError, ValueError):
    def __init__(self, symbol: Any, alphabet_label: str):
        self.symbol = symbol
        self.alphabet_label = alphabet_label
        super().__init__(f"symbol {symbol!r} is not in alphabet {alphabet_label}")


class NotPrefixFreeError(EnsembleError, ValueError):
    def __init__(self, prefix: Sequence[Any], extension: Sequence[Any]):
        self.prefix = tuple(prefix)
        self.extension = tuple(extension)
        super().__init__(f"{list(self.prefix)} is a prefix of {list(self.extension)}")


class ZeroConditioningError(EnsembleError, ValueError):
    def __init__(self, event_name: str):
        self.event_name = event_name
        super().__init__(f"cannot condition on {event_name}: certified mass is 0")


class InjectivityViolationError(EnsembleError, ValueError):
    def __init__(self, first: int, second: int, image: int):
        self.first = first
        self.second = second
        self.image = image
        super().__init__(f"index map is not injective: f({first}) = f({second}) = {image}")


class UndefinedSelectorError(EnsembleError):
    def __init__(self, rule_name: str, prefix_length: int):
        self.rule_name = rule_name
        self.prefix_length = prefix_length
        super().__init__(f"selection rule {rule_name} is undefined on a prefix of length {prefix_length}")


class BudgetExhaustedError(EnsembleError):
    def __init__(self, what: str, scanned: int, budget: int):
        self.what = what
        self.scanned = scanned
        self.budget = budget
        super().__init__(f"{what}: budget exhausted after {scanned} steps (budget {budget})")


class PartitionViolationError(EnsembleError, ValueError):
    def __init__(self, symbol: Any, reason: str):
        self.symbol = symbol
        self.reason = reason
        super().__init__(f"partition violated at symbol {symbol!r}: {reason}")


class CoverViolationError(EnsembleError, ValueError):
    def __init__(self, witness: Sequence[Any]):
        self.witness = tuple(witness)
        super().__init__(f"cover escaped along {list(self.witness)}")


class InclusionViolationError(EnsembleError, ValueError):
    def __init__(self, counterexample: Sequence[Any]):
        self.counterexample = tuple(counterexample)
        super().__init__(f"inclusion fails at {list(self.counterexample)}")


class BoundViolationError(EnsembleError):
    def __init__(self, level: int, mass: Any):
        self.level = level
        self.mass = mass
        super().__init__(f"level {level} has mass {mass}, not below 2^-{level}")


class LengthPreconditionError(EnsembleError, ValueError):
    pass


class UnknownOperationError(EnsembleError, KeyError):
    def __init__(self, kind: str, name: str):
        self.kind = kind
        self.name = name
        super().__init__(f"unknown {kind}: {name}")

    def __str__(self) -> str:
        return f"unknown {self.kind}: {self.name}"


class SpecParseError(EnsembleError, ValueError):
    def __init__(self, path: str, message: str, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


class StreamExhaustedError(EnsembleError):
    def __init__(self, needed: int, available: int):
        self.needed = needed
        self.available = available
        super().__init__(f"stream has {available} symbols, {needed} required")


class AlphabetMismatchError(EnsembleError, ValueError):
    def __init__(self, first_label: str, second_label: str):
        self.first_label = first_label
        self.second_label = second_label
        super().__init__(f"streams live on different alphabets: {first_label} vs {second_label}")
