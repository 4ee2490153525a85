from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic.functional_serializers import PlainSerializer
from pydantic.functional_validators import PlainValidator
from typing_extensions import Annotated

from ensembles.utils.helpers import format_rational, parse_rational


def _coerce_rational(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    return parse_rational(value)


# exact rational, serialized as "num/den"
Rational = Annotated[Fraction, PlainValidator(_coerce_rational), PlainSerializer(format_rational, return_type=str)]


# Input files

class DistributionFamily(str, Enum):
    GEOMETRIC = "geometric"
    TABLE = "table"


class DistributionSpec(BaseModel):
    family: DistributionFamily
    p: Optional[Rational] = None
    masses: Optional[List[Tuple[str, Rational]]] = None
    tail: Optional[Rational] = None

    @model_validator(mode="after")
    def check_family_fields(self):
        if self.family == DistributionFamily.GEOMETRIC and self.p is None:
            raise ValueError("geometric distribution needs p")
        if self.family == DistributionFamily.TABLE:
            if not self.masses:
                raise ValueError("table distribution needs masses")
            if self.tail is not None and self.tail != 0:
                raise ValueError("table distributions are finite: tail must be 0/1")
        return self


class PipelineOp(BaseModel):
    model_config = ConfigDict(extra="allow")

    op: str

    @property
    def params(self) -> Dict[str, Any]:
        return dict(self.model_extra or {})


class PipelineConfig(BaseModel):
    seed: int
    source: Optional[DistributionSpec] = None
    n: Optional[int] = Field(None, ge=1)
    ops: List[PipelineOp] = Field(default_factory=list)
    output: Optional[str] = None


class TestDefinition(BaseModel):
    __test__ = False

    distribution: DistributionSpec
    levels: Optional[Dict[int, List[str]]] = None
    generator: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    up_to_level: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_source(self):
        if (self.levels is None) == (self.generator is None):
            raise ValueError("give exactly one of levels or generator")
        return self


# Measure verdicts

class RestrictionBound(BaseModel):
    holds: bool
    margin: Rational
    restricted_mass: Rational
    anchor_mass: Rational


class CoveringReport(BaseModel):
    equal_up_to_residual: bool
    gap: Rational
    residual: Rational


class InequalityVerdict(BaseModel):
    """lhs <= rhs (or lhs == rhs for equalities); residual is the truncation slack, reported only."""

    holds: bool
    lhs: Rational
    rhs: Rational
    residual: Rational = Fraction(0)

    def __bool__(self) -> bool:
        return self.holds


# Test verdicts

class LevelReport(BaseModel):
    level: int
    size: int
    prefix_free: bool
    mass: Rational
    bound: Rational
    margin: Rational
    passed: bool


class TestReport(BaseModel):
    __test__ = False

    distribution: str
    levels: List[LevelReport]
    passed: bool
    budgets: Dict[str, int]
    note: str = "finite-stage verdict: levels materialized within the stated budgets"

    @property
    def first_violation(self) -> Optional[LevelReport]:
        return next((lv for lv in self.levels if not lv.passed), None)


class HitReport(BaseModel):
    hit: bool
    witness: Optional[Tuple[Any, ...]] = None


class RelativeHitReport(HitReport):
    oracle_positions_read: Dict[int, List[int]] = Field(default_factory=dict)


class IdentityEntry(BaseModel):
    string: Tuple[Any, ...]
    truncated_mass: Rational
    target_mass: Rational
    residual: Rational
    holds: bool


class IdentityReport(BaseModel):
    level: int
    relation: str
    entries: List[IdentityEntry]
    holds: bool


class FubiniReport(BaseModel):
    lhs: Rational
    rhs: Rational
    equal: bool


# Statistics reports

class SymbolDeviation(BaseModel):
    symbol: str
    count: int
    frequency: float
    target: Rational
    deviation: float
    bound: float
    passed: bool


class FrequencyReport(BaseModel):
    n: int
    k_sigma: float
    counts: Dict[str, int]
    rows: List[SymbolDeviation]
    target: str
    passed: bool
    note: str = "sampled representative; a measure-one surrogate"


class GapRow(BaseModel):
    symbol: str
    count_first: int
    count_second: int
    gap: float
    bound: float
    passed: bool


class EquivalenceReport(BaseModel):
    n: int
    k_sigma: float
    rows: List[GapRow]
    covered_mass: float
    passed: bool


class IndependenceReport(BaseModel):
    n: int
    width: int
    joint_counts: Dict[str, int]
    expected: Dict[str, float]
    chi_square: float
    chi_square_quantile: float
    degrees_of_freedom: int
    unexpected_cells: int
    total_variation: float
    threshold: float
    passed: bool
    note: str = "sampled representatives; a measure-one surrogate"


class EventIndependenceReport(BaseModel):
    n: int
    events: List[str]
    cell_counts: Dict[str, int]
    total_variation: float
    max_subset_gap: float
    threshold: float
    exact_independent: Optional[bool] = None
    passed: bool


class ConditionalIndependenceReport(BaseModel):
    n_unconditioned: int
    n_conditioned: int
    frequency_a: float
    frequency_a_given_b: float
    gap: float
    bound: float
    equivalent: bool


# Command output

class StringMass(BaseModel):
    string: str
    mass: Rational


class MeasureReport(BaseModel):
    distribution: str
    strings: List[StringMass] = Field(default_factory=list)
    set_mass: Optional[Rational] = None
