import math
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr, computed_field, field_serializer, field_validator, model_validator

DEFAULT_GRID_POINTS = 4096
DEFAULT_MAX_GRID_POINTS = 1 << 20
DEFAULT_GRID_TOL = 1e-8


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


class DirectionGrid(BaseModel):
    """Uniform angles 2*pi*i/points on the unit circle."""

    model_config = {"extra": "ignore", "frozen": True}

    dimension: int = 2
    points: int = DEFAULT_GRID_POINTS
    max_points: int = DEFAULT_MAX_GRID_POINTS
    tol: float = Field(default=DEFAULT_GRID_TOL, gt=0)
    depth: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_points(self) -> "DirectionGrid":
        if self.dimension != 2:
            raise ValueError(f"Direction grids are planar only, got dimension {self.dimension}")
        for name in ("points", "max_points"):
            value = getattr(self, name)
            if value < 16 or not _is_power_of_two(value):
                raise ValueError(f"{name} must be a power of two >= 16, got {value}")
        if self.points > self.max_points:
            raise ValueError(f"points {self.points} exceeds max_points {self.max_points}")
        return self

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.points

    def angles(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.points) / self.points

    def doubled(self) -> "DirectionGrid":
        return self.model_copy(update={"points": self.points * 2, "depth": self.depth + 1})


def _readonly(values: Any) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    array.setflags(write=False)
    return array


class NormTable(BaseModel):
    """Dual norm values on a direction grid, with the angular moments of 1/F*^{2m}.

    `support_angles[i]` is the angle of the unit vector xi at which the supremum
    defining F*(omega_i) is attained. `moments[k]` is the normalized circle mean
    of cos^k sin^(2m-k) / F*^(2m).
    """

    model_config = {"extra": "ignore", "frozen": True, "arbitrary_types_allowed": True}

    symbol_text: str
    m: int = Field(gt=0)
    grid: DirectionGrid
    values: np.ndarray
    support_angles: np.ndarray
    moments: np.ndarray
    achieved_tol: float = Field(ge=0)

    _directions: np.ndarray | None = PrivateAttr(default=None)
    _settled: dict[float, "NormTable"] = PrivateAttr(default_factory=dict)

    @field_validator("values", "support_angles", "moments", mode="before")
    @classmethod
    def _to_array(cls, value: Any) -> np.ndarray:
        return _readonly(value)

    @model_validator(mode="after")
    def _check_shapes(self) -> "NormTable":
        if self.values.shape != (self.grid.points,):
            raise ValueError(f"values has shape {self.values.shape}, grid has {self.grid.points} points")
        if self.support_angles.shape != self.values.shape:
            raise ValueError("support_angles must match values")
        if self.moments.shape != (2 * self.m + 1,):
            raise ValueError(f"moments must have {2 * self.m + 1} entries, got {self.moments.shape}")
        if not np.all(self.values > 0):
            raise ValueError("Dual norm values must be strictly positive")
        return self

    @field_serializer("values", "support_angles", "moments")
    def _serialize_array(self, value: np.ndarray) -> list[float]:
        return value.tolist()

    @computed_field
    @property
    def points(self) -> int:
        return self.grid.points

    def angles(self) -> np.ndarray:
        return self.grid.angles()

    def directions(self) -> np.ndarray:
        if self._directions is None:
            angles = self.angles()
            directions = np.column_stack((np.cos(angles), np.sin(angles)))
            directions.setflags(write=False)
            self._directions = directions
        return self._directions

    def settled(self, tol: float) -> "NormTable | None":
        """A stored refinement of this table whose moments settled to `tol` or tighter."""
        tighter = [key for key in self._settled if key <= tol]
        return self._settled[max(tighter)] if tighter else None

    def remember_settled(self, tol: float, table: "NormTable") -> None:
        self._settled[tol] = table

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def from_json(cls, raw: str | bytes) -> "NormTable":
        return cls.model_validate_json(raw)
