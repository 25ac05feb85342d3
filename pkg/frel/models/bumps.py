from fractions import Fraction

from pydantic import BaseModel, field_validator

from frel.models.polynomial import Polynomial
from frel.models.reports import Rational


class TestFunction(BaseModel):
    """A polynomial u supported on a box and vanishing to order m on every face of it."""

    __test__ = False

    model_config = {"frozen": True, "arbitrary_types_allowed": True}

    polynomial: Polynomial
    box: list[tuple[Rational, Rational]]
    m: int
    label: str = ""

    @field_validator("box")
    @classmethod
    def _check_box(cls, value: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
        for axis, (lo, hi) in enumerate(value):
            if not lo < hi:
                raise ValueError(f"Support box axis {axis} is empty: [{lo}, {hi}]")
        return value

    @property
    def dimension(self) -> int:
        return self.polynomial.dimension

    def scaled(self, factor: Fraction | int) -> "TestFunction":
        return self.model_copy(update={"polynomial": self.polynomial.scale(factor), "label": f"{factor}*({self.label})"})

    def box_floats(self) -> tuple[list[float], list[float]]:
        return [float(lo) for lo, _ in self.box], [float(hi) for _, hi in self.box]
