"""Reading and writing the file formats: distribution specs, pipeline and test
definitions (JSON), stream files and string lists (line oriented)."""
import json
import sys
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Type, TypeVar

from loguru import logger
from pydantic import BaseModel, ValidationError

from ensembles.core.alphabet import CountableAlphabet, NaturalAlphabet, ProductAlphabet
from ensembles.core.space import DiscreteDistribution, FiniteDistribution, GeometricDistribution
from ensembles.core.transform import EnsembleStream, Provenance, from_symbols
from ensembles.models.errors import SpecParseError
from ensembles.models.schemas import DistributionFamily, DistributionSpec
from ensembles.utils.helpers import Symbol, SymbolString, format_symbol, parse_string, parse_symbol

PROVENANCE_PREFIX = "# provenance:"

Model = TypeVar("Model", bound=BaseModel)


def load_model(path: str, model: Type[Model]) -> Model:
    """Load and validate a JSON document"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise SpecParseError(path, e.msg, e.lineno) from e
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "document"
        raise SpecParseError(path, f"{where}: {first['msg']}") from e


def build_distribution(spec: DistributionSpec, origin: str = "<spec>") -> DiscreteDistribution:
    try:
        if spec.family == DistributionFamily.GEOMETRIC:
            return GeometricDistribution(spec.p)
        masses = {}
        for symbol_text, mass in spec.masses:
            symbol = parse_symbol(symbol_text)
            if symbol in masses:
                raise ValueError(f"symbol {symbol_text} listed twice")
            masses[symbol] = mass
        return FiniteDistribution(masses)
    except ValueError as e:
        raise SpecParseError(origin, str(e)) from e


def load_distribution(path: str) -> DiscreteDistribution:
    distribution = build_distribution(load_model(path, DistributionSpec), origin=path)
    logger.debug(f"loaded {distribution.describe()} from {path}")
    return distribution


def _content_lines(path: str) -> Iterable[Tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            yield number, raw.rstrip("\n")


def read_stream_file(path: str) -> Tuple[List[Symbol], List[str]]:
    """Symbols of a stream file plus its provenance header lines."""
    symbols: List[Symbol] = []
    provenance: List[str] = []
    for number, line in _content_lines(path):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped.startswith(PROVENANCE_PREFIX):
                provenance.append(stripped[len(PROVENANCE_PREFIX):].strip())
            continue
        try:
            symbols.append(parse_symbol(stripped))
        except ValueError:
            raise SpecParseError(path, f"not a symbol index: {stripped!r}", number)
    return symbols, provenance


def infer_alphabet(symbols: Sequence[Symbol]) -> CountableAlphabet:
    arities = {len(s) if isinstance(s, tuple) else 1 for s in symbols}
    if len(arities) > 1:
        raise ValueError("stream mixes plain and tuple symbols")
    arity = arities.pop() if arities else 1
    if arity == 1:
        return NaturalAlphabet()
    return ProductAlphabet([NaturalAlphabet() for _ in range(arity)])


def load_stream(path: str, alphabet: Optional[CountableAlphabet] = None,
                distribution: Optional[DiscreteDistribution] = None) -> EnsembleStream:
    symbols, provenance = read_stream_file(path)
    alphabet = alphabet or (distribution.alphabet if distribution is not None else infer_alphabet(symbols))
    origin = Provenance("file", (("path", Path(path).name), ("length", str(len(symbols)))),
                        tuple(Provenance(line) for line in provenance))
    return from_symbols(symbols, alphabet, origin, distribution)


def write_stream(symbols: Iterable[Symbol], out: Optional[str], provenance: Optional[str] = None) -> int:
    """Write newline-delimited symbols; returns the number written."""
    lines = []
    if provenance:
        lines.append(f"{PROVENANCE_PREFIX} {provenance}")
    count = 0
    for symbol in symbols:
        lines.append(format_symbol(symbol))
        count += 1
    _emit("\n".join(lines) + "\n", out)
    return count


def read_strings(path: str) -> List[SymbolString]:
    """One whitespace-separated string per line, λ for the empty string."""
    strings = []
    for number, line in _content_lines(path):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            strings.append(parse_string(stripped))
        except ValueError:
            raise SpecParseError(path, f"not a string of symbol indices: {stripped!r}", number)
    return strings


def write_report(report: BaseModel, out: Optional[str]) -> None:
    _emit(report.model_dump_json(indent=2) + "\n", out)


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    target = Path(out)
    if target.parent and not target.parent.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text, encoding="utf-8")
