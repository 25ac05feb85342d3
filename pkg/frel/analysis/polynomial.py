from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from frel.errors import ConvergenceError, ErrorCode, SymbolError
from frel.models.polynomial import (
    SymbolPolynomial,
    apply_operator,
    differentiate,
    evaluate,
    evaluate_array,
    integrate_box,
    substitute,
)
from frel.models.types import FAMILY_PARAMETER, FAMILY_TEMPLATES, normalize_family
from frel.utils.grammar import format_polynomial, parse_polynomial
from frel.utils.optimize import circle_points, golden_section, sphere_samples, uniform_angles

logger = logging.getLogger(__name__)

__all__ = [
    "SphereExtrema",
    "apply_operator",
    "differentiate",
    "evaluate",
    "evaluate_array",
    "family_symbol",
    "format_polynomial",
    "integrate_box",
    "is_elliptic",
    "min_max_on_sphere",
    "parse",
    "parse_polynomial",
    "substitute",
]

# Tunables
SPHERE_GRID_POINTS = 4096
SPHERE_TOL = 1e-10
ELLIPTIC_TOL = 1e-12
SAMPLED_POINTS_LOG2 = 17
SAMPLED_POLISH_STARTS = 8
DEFAULT_SEED = 20240101


def parse(
    text: str,
    bindings: Mapping[str, object] | None = None,
    dimension: int | None = None,
) -> SymbolPolynomial:
    polynomial = parse_polynomial(text, bindings, dimension)
    symbol = SymbolPolynomial(polynomial)
    logger.debug("Parsed symbol: text=%r m=%d terms=%d", text, symbol.m, len(symbol.terms))
    return symbol


def family_symbol(family: str, beta: Fraction | int | float | str, template: str | None = None) -> SymbolPolynomial:
    """Bind the family parameter `b` and parse. Custom families pass their own template."""
    name = normalize_family(family)
    if name == "custom":
        if template is None:
            raise SymbolError("A custom family needs a template", ErrorCode.UNBOUND_PARAMETER)
        text = template
    else:
        text = FAMILY_TEMPLATES[name]
    return parse(text, {FAMILY_PARAMETER: beta}, dimension=2)


@dataclass(frozen=True)
class SphereExtrema:
    lower: float
    upper: float
    argmin: tuple[float, ...]
    argmax: tuple[float, ...]
    certified: bool

    def __iter__(self):
        return iter((self.lower, self.upper))


def _circle_extrema(symbol: SymbolPolynomial, tol: float) -> SphereExtrema:
    angles = uniform_angles(SPHERE_GRID_POINTS)
    values = evaluate_array(symbol, circle_points(angles))
    step = angles[1] - angles[0]

    def on_circle(theta: np.ndarray) -> np.ndarray:
        return evaluate_array(symbol, circle_points(theta))

    # argmin/argmax return the first hit, which is the smallest angle on ties
    lo_index = int(np.argmin(values))
    hi_index = int(np.argmax(values))
    xtol = max(math.sqrt(tol), 1e-12) * step
    centers = np.array([angles[lo_index], angles[hi_index]])
    lo_theta, lo_value = golden_section(on_circle, centers[:1] - step, centers[:1] + step, xtol)
    hi_theta, hi_value = golden_section(on_circle, centers[1:] - step, centers[1:] + step, xtol, maximize=True)
    lower = min(float(lo_value[0]), float(values[lo_index]))
    upper = max(float(hi_value[0]), float(values[hi_index]))
    if not math.isfinite(lower) or not math.isfinite(upper):
        raise ConvergenceError(f"Sphere search produced a non-finite value for {symbol.text}")
    return SphereExtrema(
        lower=lower,
        upper=upper,
        argmin=(math.cos(lo_theta[0]), math.sin(lo_theta[0])),
        argmax=(math.cos(hi_theta[0]), math.sin(hi_theta[0])),
        certified=True,
    )


def _sampled_extrema(symbol: SymbolPolynomial, tol: float, seed: int) -> SphereExtrema:
    points = sphere_samples(symbol.dimension, SAMPLED_POINTS_LOG2, seed)
    values = evaluate_array(symbol, points)
    order = np.argsort(values, kind="stable")

    def on_sphere(x: np.ndarray) -> float:
        norm = float(np.linalg.norm(x))
        if norm == 0:
            return math.inf
        return float(evaluate_array(symbol, (x / norm)[None, :])[0])

    def polish(starts: np.ndarray, sign: float) -> tuple[float, np.ndarray]:
        best_value, best_point = math.inf, starts[0]
        for start in starts:
            result = minimize(
                lambda x: sign * on_sphere(x),
                start,
                method="Nelder-Mead",
                options={"xatol": tol, "fatol": tol},
            )
            candidate = result.x / np.linalg.norm(result.x)
            if result.fun < best_value:
                best_value, best_point = float(result.fun), candidate
        return sign * best_value, best_point

    lower, argmin = polish(points[order[:SAMPLED_POLISH_STARTS]], 1.0)
    upper, argmax = polish(points[order[::-1][:SAMPLED_POLISH_STARTS]], -1.0)
    lower = min(lower, float(values[order[0]]))
    upper = max(upper, float(values[order[-1]]))
    logger.warning(
        "Non-certified sphere search: dimension=%d samples=%d lower=%.12g upper=%.12g",
        symbol.dimension,
        points.shape[0],
        lower,
        upper,
    )
    return SphereExtrema(
        lower=lower,
        upper=upper,
        argmin=tuple(float(v) for v in argmin),
        argmax=tuple(float(v) for v in argmax),
        certified=False,
    )


def min_max_on_sphere(symbol: SymbolPolynomial, tol: float = SPHERE_TOL, seed: int = DEFAULT_SEED) -> SphereExtrema:
    """Extremes of the symbol on the unit sphere. Certified on the circle, sampled above that."""
    if symbol.dimension == 1:
        value = float(evaluate(symbol, [Fraction(1)]))
        return SphereExtrema(value, value, (1.0,), (1.0,), certified=True)
    if symbol.dimension == 2:
        return _circle_extrema(symbol, tol)
    return _sampled_extrema(symbol, tol, seed)


def is_elliptic(symbol: SymbolPolynomial, tol: float = ELLIPTIC_TOL) -> bool:
    return min_max_on_sphere(symbol).lower >= tol
