from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, field_validator, model_validator

from cli import runtime_config
from frel.analysis.polynomial import family_symbol, parse
from frel.errors import ErrorCode, SymbolError
from frel.models.norms import DirectionGrid
from frel.models.polynomial import SymbolPolynomial
from frel.models.types import FAMILY_PARAMETER, Family, OutputFormat, normalize_family


class RunConfig(BaseModel):
    """Everything one CLI run needs. Defaults < JSON config file < command-line flags."""

    model_config = {"extra": "forbid"}

    symbol: str | None = None
    family: Family | None = None
    params: dict[str, str] = Field(default_factory=dict)

    grid_points: int = runtime_config.GRID_POINTS
    max_grid_points: int = runtime_config.MAX_GRID_POINTS
    grid_tol: float = Field(default=runtime_config.GRID_TOL, gt=0)
    opt_tol: float = Field(default=runtime_config.OPT_TOL, gt=0)
    moment_tol: float = Field(default=runtime_config.MOMENT_TOL, gt=0)
    quad_tol: float = Field(default=runtime_config.QUAD_TOL, gt=0)
    quad_max_cells: int = Field(default=runtime_config.QUAD_MAX_CELLS, gt=0)

    sweep_points: int = Field(default=runtime_config.SWEEP_POINTS, ge=2)
    beta_min: float = -0.99
    beta_max: float = 100.0
    include_collapse: bool = True
    workers: int = Field(default=runtime_config.WORKERS, ge=1)

    domain: str | None = None
    halfspace: str | None = None
    box: str | None = None
    bump_extra: str | None = None
    duality: bool = False
    remark: bool = False
    samples: int = Field(default=100_000, gt=0)
    seed: int = Field(default=runtime_config.SEED, ge=0)

    m: list[int] = Field(default_factory=lambda: [1, 2, 3])
    eps: list[float] = Field(default_factory=lambda: [1.0, 0.1, 0.01])

    out: str | None = None
    svg: str | None = None
    format: OutputFormat | None = None

    log_level: str = runtime_config.LOG_LEVEL
    log_json: bool = runtime_config.LOG_JSON
    log_file: str | None = None

    @field_validator("family", mode="before")
    @classmethod
    def _normalize_family(cls, value: Any) -> Any:
        if value is None:
            return None
        return normalize_family(str(value))

    @field_validator("params", mode="before")
    @classmethod
    def _stringify_params(cls, value: Any) -> Any:
        if isinstance(value, dict):
            return {str(k): str(v) for k, v in value.items()}
        return value

    @field_validator("m")
    @classmethod
    def _check_orders(cls, value: list[int]) -> list[int]:
        if any(m < 1 for m in value):
            raise ValueError(f"Half-orders must be at least 1, got {value}")
        return value

    @field_validator("eps")
    @classmethod
    def _check_eps(cls, value: list[float]) -> list[float]:
        if any(e <= 0 for e in value):
            raise ValueError(f"eps values must be positive, got {value}")
        return value

    @model_validator(mode="after")
    def _check_family_range(self) -> RunConfig:
        if self.family in ("example1", "example2"):
            if self.beta_min <= -1:
                raise ValueError(f"Sweep range must stay above -1 for {self.family}, got beta_min={self.beta_min}")
            beta = self.params.get(FAMILY_PARAMETER)
            if beta is not None and Fraction(beta) <= -1:
                raise ValueError(f"Family parameter must exceed -1, got {beta}")
        if self.beta_max <= self.beta_min:
            raise ValueError(f"beta_max must exceed beta_min, got ({self.beta_min}, {self.beta_max})")
        return self

    @classmethod
    def resolve(cls, overrides: dict[str, Any], config_path: str | None = None) -> RunConfig:
        data: dict[str, Any] = {}
        if config_path:
            data.update(json.loads(Path(config_path).read_text()))
        data.update(overrides)
        return cls.model_validate(data)

    def grid(self) -> DirectionGrid:
        return DirectionGrid(points=self.grid_points, max_points=self.max_grid_points, tol=self.grid_tol)

    def bindings(self) -> dict[str, Fraction]:
        return {name: Fraction(value) for name, value in self.params.items()}

    def beta(self) -> Fraction:
        if FAMILY_PARAMETER not in self.params:
            raise SymbolError(f"Family {self.family} needs --param {FAMILY_PARAMETER}=<value>", ErrorCode.UNBOUND_PARAMETER)
        return Fraction(self.params[FAMILY_PARAMETER])

    def parsed_symbol(self) -> SymbolPolynomial:
        if self.family in ("example1", "example2"):
            return family_symbol(self.family, self.beta())
        if self.symbol is None:
            raise SymbolError("Give --symbol or --family", ErrorCode.SYNTAX)
        return parse(self.symbol, self.bindings())
