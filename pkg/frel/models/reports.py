from fractions import Fraction
from typing import Annotated, Any

from pydantic import BaseModel, Field, PlainSerializer, PlainValidator, computed_field

from frel.models.types import StrongerBound


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"Cannot read {value!r} as a rational")


def fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


Rational = Annotated[Fraction, PlainValidator(_to_fraction), PlainSerializer(fraction_text, return_type=str)]


class ConstantsReport(BaseModel):
    model_config = {"extra": "ignore", "populate_by_name": True}

    symbol: str
    m: int
    lower: float = Field(alias="lambda")
    upper: float = Field(alias="Lambda")
    c: float
    mu: float
    big_m: float = Field(alias="M")
    s: float
    rellich: Rational = Field(alias="A")
    theorem2: float
    comparison: float
    stronger: StrongerBound
    table_points: int
    table_tol: float
    opt_tol: float
    certified: bool = True


class SweepRow(BaseModel):
    """One parameter value of a family sweep. Failed rows keep `error` and leave the numbers empty."""

    model_config = {"extra": "ignore", "populate_by_name": True}

    beta: float
    lower: float | None = Field(default=None, alias="lambda")
    upper: float | None = Field(default=None, alias="Lambda")
    c: float | None = None
    mu: float | None = None
    big_m: float | None = Field(default=None, alias="M")
    s: float | None = None
    reference_c: float | None = None
    error: str | None = None

    @computed_field
    @property
    def ok(self) -> bool:
        return self.error is None


class QuotientReport(BaseModel):
    model_config = {"extra": "ignore"}

    kind: str
    symbol: str
    domain: dict[str, Any]
    box: list[tuple[Rational, Rational]]
    test_function: str
    energy: Rational
    weighted_mass: float
    mass_error: float
    mass_cells: int
    ratio: float
    bound: float
    bound_name: str
    margin: float
    passed: bool
    comparison_bound: float | None = None
    stronger: StrongerBound | None = None
    sharp_ratio: float | None = None
    tol: float
    seed: int | None = None


class DualityReport(BaseModel):
    model_config = {"extra": "ignore"}

    symbol: str
    samples: int
    seed: int
    worst_slack: float
    worst_xi: tuple[float, float]
    worst_omega: tuple[float, float]
    threshold: float
    passed: bool


class RemarkReport(BaseModel):
    model_config = {"extra": "ignore"}

    family: str
    beta: float
    m: int
    lower_factor: float
    upper_factor: float
    points: int
    min_value: float
    max_value: float
    lower_margin: float
    upper_margin: float
    passed: bool


class QuotientPoint(BaseModel):
    m: int
    eps: float
    closed_form: float
    numeric: float | None = None
    limit: Rational


class QuadratureSpec(BaseModel):
    """Settings for the one-dimensional quotient quadrature on (cutoff, 1)."""

    model_config = {"extra": "ignore", "frozen": True}

    epsrel: float = Field(default=1e-13, gt=0)
    limit: int = Field(default=200, gt=0)
    cutoff: float = Field(default=1e-3, gt=0, lt=1)
