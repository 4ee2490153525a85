"""Named events, random variables, selection rules, index maps, pipeline ops and
test generators, so JSON configs can refer to host functions by name."""
from itertools import count as count_from, takewhile
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from loguru import logger

from ensembles.core import events as ev
from ensembles.core.alphabet import CountableAlphabet
from ensembles.core.events import EventPredicate, RandomVariable
from ensembles.core.mltest import MLTest, zero_probability_test
from ensembles.core.space import DiscreteDistribution
from ensembles.core.transform import (
    EnsembleStream,
    IndexMap,
    SelectionRule,
    characteristic,
    condition,
    contract,
    map_stream,
    select,
    shuffle,
)
from ensembles.models.errors import UnknownOperationError
from ensembles.models.schemas import PipelineOp
from ensembles.utils.helpers import Symbol, parse_string, parse_symbol

NamedSpec = Union[str, Mapping[str, Any]]


def _split(spec: NamedSpec) -> Tuple[str, Dict[str, Any]]:
    if isinstance(spec, str):
        return spec, {}
    params = dict(spec)
    try:
        name = params.pop("name")
    except KeyError:
        raise ValueError(f"named spec without a name: {spec!r}")
    return name, params


def _symbol(value: Any) -> Symbol:
    if isinstance(value, str):
        return parse_symbol(value)
    if isinstance(value, list):
        return tuple(value)
    return value


class _Primes:
    """k -> the k-th prime, cached."""

    def __init__(self):
        self.found: List[int] = []
        self._candidates = count_from(2)

    def __call__(self, k: int) -> int:
        while len(self.found) < k:
            candidate = next(self._candidates)
            if all(candidate % p for p in takewhile(lambda p: p * p <= candidate, self.found)):
                self.found.append(candidate)
        return self.found[k - 1]


class Registry:
    def __init__(self):
        self.index_maps: Dict[str, Callable[..., IndexMap]] = {
            "identity": lambda: IndexMap("identity", lambda k: k),
            "shift": lambda by=1: IndexMap(f"shift{by}", lambda k: k + by),
            "stride": lambda by=2: IndexMap(f"stride{by}", lambda k: by * k),
            "primes": lambda: IndexMap("primes", _Primes()),
        }
        self.rules: Dict[str, Callable[..., SelectionRule]] = {
            "always": lambda: SelectionRule("always", lambda prefix: True),
            "even_length": lambda: SelectionRule("even_length", lambda prefix: len(prefix) % 2 == 0),
            "every_k": lambda k=3: SelectionRule(f"every{k}", lambda prefix: len(prefix) % k == 0),
            "after_symbol": lambda symbol=0: SelectionRule(
                f"after{symbol}", lambda prefix: bool(prefix) and prefix[-1] == _symbol(symbol)),
        }
        self.events: Dict[str, Callable[..., EventPredicate]] = {
            "all": lambda: ev.whole(),
            "none": lambda: ev.empty(),
            "even": lambda: ev.even(),
            "odd": lambda: ev.odd(),
            "residue": lambda k, r: ev.residue_class(k, r),
            "set": lambda members: ev.finite_event(_symbol(m) for m in members),
            "less_than": lambda m: ev.less_than(m),
            "complement": lambda of: ev.complement(self.event(of)),
        }
        self.variables: Dict[str, Callable[..., RandomVariable]] = {
            "identity": lambda domain=None: ev.identity(domain),
            "mod": lambda k=2, domain=None: ev.modulo(k),
            "constant": lambda value=0, domain=None: ev.constant(_symbol(value), domain),
            "indicator": lambda event, domain=None: ev.indicator(self.event(event), domain),
            "collapse": lambda event, filler, domain=None: ev.collapse_outside(self.event(event), _symbol(filler), domain),
        }
        self.ops: Dict[str, Callable[[EnsembleStream, Dict[str, Any]], EnsembleStream]] = {
            "identity": lambda stream, params: stream,
            "shuffle": self._shuffle,
            "select": self._select,
            "condition": lambda stream, params: condition(stream, self.event(params["event"]), params.get("budget")),
            "characteristic": lambda stream, params: characteristic(stream, self.event(params["event"])),
            "contract": self._contract,
            "map": self._map,
        }
        self.test_generators: Dict[str, Callable[..., MLTest]] = {
            "zero_probability": self._zero_probability,
            "repeat": self._repeat,
        }

    @staticmethod
    def _lookup(table: Mapping[str, Callable], kind: str, name: str) -> Callable:
        if name not in table:
            raise UnknownOperationError(kind, name)
        return table[name]

    def index_map(self, spec: NamedSpec) -> IndexMap:
        name, params = _split(spec)
        return self._lookup(self.index_maps, "index map", name)(**params)

    def rule(self, spec: NamedSpec) -> SelectionRule:
        name, params = _split(spec)
        return self._lookup(self.rules, "selection rule", name)(**params)

    def event(self, spec: NamedSpec) -> EventPredicate:
        name, params = _split(spec)
        return self._lookup(self.events, "event", name)(**params)

    def variable(self, spec: NamedSpec, domain: Optional[CountableAlphabet] = None) -> RandomVariable:
        name, params = _split(spec)
        return self._lookup(self.variables, "random variable", name)(domain=domain, **params)

    def _shuffle(self, stream: EnsembleStream, params: Dict[str, Any]) -> EnsembleStream:
        return shuffle(stream, self.index_map(params["map"]))

    def _select(self, stream: EnsembleStream, params: Dict[str, Any]) -> EnsembleStream:
        return select(stream, self.rule(params["rule"]), params.get("budget"))

    def _contract(self, stream: EnsembleStream, params: Dict[str, Any]) -> EnsembleStream:
        blocks = [self.event(b) for b in params["blocks"]]
        targets = [_symbol(t) for t in params["targets"]]
        return contract(stream, blocks, targets, params.get("check_width"))

    def _map(self, stream: EnsembleStream, params: Dict[str, Any]) -> EnsembleStream:
        return map_stream(stream, self.variable(params["variable"], stream.alphabet))

    def apply(self, stream: EnsembleStream, op: PipelineOp) -> EnsembleStream:
        handler = self._lookup(self.ops, "op", op.op)
        try:
            result = handler(stream, op.params)
        except KeyError as e:
            if isinstance(e, UnknownOperationError):
                raise
            raise ValueError(f"op {op.op} is missing parameter {e.args[0]!r}") from e
        logger.debug(f"applied {op.op}: {result.provenance.describe()}")
        return result

    def apply_all(self, stream: EnsembleStream, ops: Iterable[PipelineOp]) -> EnsembleStream:
        for op in ops:
            stream = self.apply(stream, op)
        return stream

    def _zero_probability(self, P: DiscreteDistribution, symbol: Any = 0, width: int = None,
                          depth: int = 4) -> MLTest:
        return zero_probability_test(P, _symbol(symbol), width, depth)

    @staticmethod
    def _repeat(P: DiscreteDistribution, symbol: Any = 0, offset: int = 1) -> MLTest:
        """C_n = {a^(n + offset)}."""
        a = _symbol(symbol)
        return MLTest(P, lambda n: [(a,) * (n + offset)], name=f"repeat[{a},+{offset}]")

    def test(self, P: DiscreteDistribution, generator: str, params: Mapping[str, Any]) -> MLTest:
        return self._lookup(self.test_generators, "test generator", generator)(P, **params)


def explicit_test(P: DiscreteDistribution, levels: Mapping[int, Iterable[str]]) -> MLTest:
    parsed = {int(n): [parse_string(s) for s in strings] for n, strings in levels.items()}
    return MLTest(P, parsed, name="explicit")


registry = Registry()
