"""One-dimensional Rellich quotient for the trial family g(t) = t^s, s = (2m-1)/2 + eps.

Both integrands are pure powers of t with exponent 2s - 2m = 2 eps - 1:

    (g^(m))^2    = c_m^2 t^(2 eps - 1),   c_m = prod_{j<m} (s - j)
    g^2 / t^(2m) =       t^(2 eps - 1)

so each integral over (0, 1) equals its coefficient divided by 2 eps and the
quotient is c_m^2, which tends to A(m) as eps -> 0.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction

from scipy.integrate import quad

from frel.analysis.constants import rellich_constant
from frel.analysis.finsler import biconjugate, finsler_F
from frel.errors import ConvergenceError
from frel.models.norms import NormTable
from frel.models.polynomial import SymbolPolynomial
from frel.models.reports import QuadratureSpec

logger = logging.getLogger(__name__)


def _check_eps(eps: float | Fraction) -> None:
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")


def _check_order(m: int) -> None:
    if m < 1:
        raise ValueError(f"Half-order m must be at least 1, got {m}")


def quotient_closed_form(m: int, eps: float | Fraction) -> float | Fraction:
    """prod_{j=0}^{m-1} ((2m-1)/2 + eps - j)^2; exact for rational eps."""
    _check_order(m)
    _check_eps(eps)
    if isinstance(eps, Fraction | int):
        s = Fraction(2 * m - 1, 2) + Fraction(eps)
        return math.prod(((s - j) ** 2 for j in range(m)), start=Fraction(1))
    s = (2 * m - 1) / 2 + float(eps)
    return math.prod((s - j) ** 2 for j in range(m))


def _derivative_coefficient(power: float, order: int) -> tuple[float, float]:
    """Coefficient and exponent of the order-th derivative of t^power."""
    coefficient = 1.0
    for _ in range(order):
        coefficient *= power
        power -= 1.0
    return coefficient, power


def _integrate_power_tail(exponent: float, coefficient: float, spec: QuadratureSpec) -> float:
    """Integral of coefficient * t^exponent over (0, 1): quadrature on (cutoff, 1) plus the exact tail."""
    delta = spec.cutoff

    # t = e^u turns the integrand into a smooth exponential on (log delta, 0)
    def integrand(u: float) -> float:
        return coefficient * math.exp((exponent + 1.0) * u)

    body, error = quad(integrand, math.log(delta), 0.0, epsabs=0.0, epsrel=spec.epsrel, limit=spec.limit)
    if not math.isfinite(body) or error > 100 * spec.epsrel * abs(body):
        raise ConvergenceError(f"Quotient quadrature failed: value={body!r} error={error!r}")
    tail = coefficient * delta ** (exponent + 1.0) / (exponent + 1.0)
    return body + tail


def quotient_numeric(m: int, eps: float, spec: QuadratureSpec | None = None) -> float:
    """Energy over weighted mass for t^s on (0, 1), by quadrature."""
    _check_order(m)
    _check_eps(eps)
    spec = spec or QuadratureSpec()
    power = (2 * m - 1) / 2 + float(eps)
    derivative, derivative_power = _derivative_coefficient(power, m)
    energy = _integrate_power_tail(2.0 * derivative_power, derivative**2, spec)
    mass = _integrate_power_tail(2.0 * power - 2.0 * m, 1.0, spec)
    ratio = energy / mass
    logger.debug("Quotient: m=%d eps=%.3g energy=%.12g mass=%.12g ratio=%.15g", m, eps, energy, mass, ratio)
    return ratio


def sharp_ratio_halfspace(
    symbol: SymbolPolynomial,
    table: NormTable,
    normal: tuple[float, ...] | list[float],
) -> float:
    """(F(normal) / F**(normal))^(2m) A(m): the limit of the trial quotient on the half-space."""
    length = math.hypot(*normal)
    if abs(length - 1.0) > 1e-12:
        raise ValueError(f"Half-space normal must be a unit vector, got length {length!r}")
    ratio = finsler_F(symbol, normal) / biconjugate(symbol, normal, table)
    return ratio ** (2 * symbol.m) * float(rellich_constant(symbol.m))
