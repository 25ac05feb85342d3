from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from frel.analysis.finsler import (
    biconjugate_angles,
    biconjugate_direction,
    build_norm_table,
    check_table,
    refine_table,
)
from frel.analysis.polynomial import ELLIPTIC_TOL, family_symbol, min_max_on_sphere
from frel.errors import AnalysisError, ConvergenceError, NotEllipticError, UnsupportedDimensionError
from frel.models.norms import DirectionGrid, NormTable
from frel.models.polynomial import SymbolPolynomial, evaluate_array
from frel.models.reports import ConstantsReport, SweepRow
from frel.models.types import FAMILY_COLLAPSE_BETA, StrongerBound, normalize_family
from frel.utils.optimize import circle_points, golden_section, golden_section_scalar

logger = logging.getLogger(__name__)

# Tunables
MOMENT_TOL = 1e-10
OPT_TOL = 1e-10
XI_SCAN_POINTS = 4096
MOMENT_CHECK_POINTS = 256
SWEEP_WORKERS = 4
DEFAULT_SWEEP_POINTS = 200
DEFAULT_SWEEP_LO = -0.99
DEFAULT_SWEEP_HI = 100.0


def rellich_constant(m: int) -> Fraction:
    """A(m) = prod_{j=1..m} (2j-1)^2 / 4^m, exact. A(0) = 1."""
    if m < 0:
        raise ValueError(f"Half-order m must be non-negative, got {m}")
    product = math.prod((2 * j - 1) ** 2 for j in range(1, m + 1))
    return Fraction(product, 4**m)


def moment_polynomial(moments: np.ndarray, m: int, points: np.ndarray) -> np.ndarray:
    """G(xi) = sum_k C(2m, k) xi1^k xi2^(2m-k) M_k at each row of points."""
    x, y = points[:, 0], points[:, 1]
    total = np.zeros(points.shape[0])
    for k in range(2 * m + 1):
        total += math.comb(2 * m, k) * x**k * y ** (2 * m - k) * moments[k]
    return total


def _moment_value(moments: np.ndarray, m: int, xi: Sequence[float]) -> float:
    return math.fsum(
        math.comb(2 * m, k) * xi[0] ** k * xi[1] ** (2 * m - k) * float(moments[k]) for k in range(2 * m + 1)
    )


def _half_moments(table: NormTable) -> np.ndarray:
    angles = table.angles()[0::2]
    values = table.values[0::2]
    c, s = np.cos(angles), np.sin(angles)
    weights = values ** (-2 * table.m)
    return np.array([np.mean(c**k * s ** (2 * table.m - k) * weights) for k in range(2 * table.m + 1)])


def _circle_moment_gap(table: NormTable) -> float:
    """Largest relative gap between G from the full table and from its even half, over unit xi."""
    points = circle_points(np.pi * np.arange(MOMENT_CHECK_POINTS) / MOMENT_CHECK_POINTS)
    fine = moment_polynomial(table.moments, table.m, points)
    coarse = moment_polynomial(_half_moments(table), table.m, points)
    return float(np.max(np.abs(fine - coarse) / np.abs(fine)))


def moment_table(symbol: SymbolPolynomial, table: NormTable, tol: float = MOMENT_TOL) -> NormTable:
    """`table`, doubled until G agrees with its half-table value to `tol` at every unit xi.

    The result is stored on `table`, so later moment evaluations reuse it.
    """
    check_table(symbol, table)
    cached = table.settled(tol)
    if cached is not None:
        return cached
    current = table
    while (gap := _circle_moment_gap(current)) > tol:
        if current.grid.points * 2 > current.grid.max_points:
            raise ConvergenceError(f"Angular moments did not settle: gap={gap:.3e} at {current.grid.points} points")
        current = refine_table(symbol, current)
    table.remember_settled(tol, current)
    logger.debug("Settled moments: symbol=%s points=%d gap=%.3e", symbol.text, current.points, gap)
    return current


def angular_moment(
    symbol: SymbolPolynomial,
    xi: Sequence[float],
    table: NormTable,
    tol: float = MOMENT_TOL,
) -> float:
    """Normalized circle integral of (xi.omega)^(2m) / F*(omega)^(2m)."""
    vector = [float(v) for v in xi]
    if len(vector) != 2:
        raise UnsupportedDimensionError("Angular moments are computed for planar symbols only")
    return _moment_value(moment_table(symbol, table, tol).moments, symbol.m, vector)


@dataclass(frozen=True)
class MomentBounds:
    mu: float
    big_m: float
    mu_angle: float
    big_m_angle: float

    def __iter__(self):
        return iter((self.mu, self.big_m))


def mu_M(
    symbol: SymbolPolynomial,
    table: NormTable,
    tol: float = OPT_TOL,
    moment_tol: float = MOMENT_TOL,
) -> MomentBounds:
    """Best constants with mu F**(xi)^(2m) <= G(xi) <= M H(xi) on the unit circle.

    Both ratios are even and 0-homogeneous, so xi runs over [0, pi). G comes from
    the moments settled to `moment_tol`. The scan uses the discrete F**; the
    minimizer of G/F**^(2m) is then polished with refined F** values.
    """
    m = symbol.m
    angles = np.pi * np.arange(XI_SCAN_POINTS) / XI_SCAN_POINTS
    step = float(angles[1])
    points = circle_points(angles)
    moments = moment_table(symbol, table, moment_tol).moments
    g_values = moment_polynomial(moments, m, points)
    h_values = evaluate_array(symbol, points)
    upper_ratio = g_values / h_values

    def upper_at(theta: np.ndarray) -> np.ndarray:
        pts = circle_points(theta)
        return moment_polynomial(moments, m, pts) / evaluate_array(symbol, pts)

    xtol = max(math.sqrt(tol), 1e-12) * step
    hi_index = int(np.argmax(upper_ratio))
    center = np.array([angles[hi_index]])
    hi_theta, hi_value = golden_section(upper_at, center - step, center + step, xtol, maximize=True)
    big_m = max(float(hi_value[0]), float(upper_ratio[hi_index]))

    lower_ratio = g_values / biconjugate_angles(table, angles) ** (2 * m)
    lo_index = int(np.argmin(lower_ratio))

    def lower_at(theta: float) -> float:
        refined, _ = biconjugate_direction(symbol, table, theta)
        return _moment_value(moments, m, (math.cos(theta), math.sin(theta))) / refined ** (2 * m)

    center_lo = float(angles[lo_index])
    lo_theta, mu = golden_section_scalar(lower_at, center_lo - step, center_lo + step, xtol)
    mu = min(mu, lower_at(center_lo))
    logger.debug("mu/M: symbol=%s mu=%.12g M=%.12g", symbol.text, mu, big_m)
    return MomentBounds(mu=mu, big_m=big_m, mu_angle=lo_theta, big_m_angle=float(hi_theta[0]))


def comparison_constant(symbol: SymbolPolynomial) -> float:
    extrema = min_max_on_sphere(symbol)
    if extrema.lower < ELLIPTIC_TOL:
        raise NotEllipticError(f"Symbol {symbol.text} is not elliptic: lambda={extrema.lower:.6g}")
    return extrema.lower / extrema.upper


def theorem2_constant(
    symbol: SymbolPolynomial,
    table: NormTable,
    tol: float = OPT_TOL,
    moment_tol: float = MOMENT_TOL,
) -> float:
    bounds = mu_M(symbol, table, tol, moment_tol)
    return float(rellich_constant(symbol.m)) * bounds.mu / bounds.big_m


def stronger_bound(theorem2: float, comparison: float, tol: float = 1e-12) -> StrongerBound:
    if abs(theorem2 - comparison) <= tol * max(abs(theorem2), abs(comparison)):
        return "equal"
    return "theorem2" if theorem2 > comparison else "comparison"


def compute_constants(
    symbol: SymbolPolynomial,
    table: NormTable | None = None,
    tol: float = OPT_TOL,
    grid: DirectionGrid | None = None,
    moment_tol: float = MOMENT_TOL,
) -> ConstantsReport:
    extrema = min_max_on_sphere(symbol)
    if extrema.lower < ELLIPTIC_TOL:
        raise NotEllipticError(f"Symbol {symbol.text} is not elliptic: lambda={extrema.lower:.6g}")
    if table is None:
        table = build_norm_table(symbol, grid)
    bounds = mu_M(symbol, table, tol, moment_tol)
    rellich = rellich_constant(symbol.m)
    c = extrema.lower / extrema.upper
    s = bounds.mu / bounds.big_m
    theorem2 = float(rellich) * s
    comparison = float(rellich) * c
    report = ConstantsReport(
        symbol=symbol.text,
        m=symbol.m,
        lower=extrema.lower,
        upper=extrema.upper,
        c=c,
        mu=bounds.mu,
        big_m=bounds.big_m,
        s=s,
        rellich=rellich,
        theorem2=theorem2,
        comparison=comparison,
        stronger=stronger_bound(theorem2, comparison),
        table_points=table.points,
        table_tol=table.achieved_tol,
        opt_tol=tol,
        certified=extrema.certified,
    )
    logger.info("Computed constants: symbol=%s c=%.9f s=%.9f", symbol.text, c, s)
    return report


def closed_form_comparison_constant(family: str, beta: float) -> float:
    """Closed-form lambda/Lambda for the two example families."""
    name = normalize_family(family)
    if beta <= -1:
        raise ValueError(f"Family parameter must exceed -1, got {beta}")
    if name == "example1":
        return (beta + 1) / 2 if beta <= 1 else 2 / (beta + 1)
    if name == "example2":
        return (beta + 1) / 4 if beta <= 3 else 4 / (beta + 1)
    raise ValueError("Closed-form comparison constants exist only for example1 and example2")


def default_beta_grid(
    count: int = DEFAULT_SWEEP_POINTS,
    lo: float = DEFAULT_SWEEP_LO,
    hi: float = DEFAULT_SWEEP_HI,
    include: Iterable[float] = (float(FAMILY_COLLAPSE_BETA["example1"]), float(FAMILY_COLLAPSE_BETA["example2"])),
) -> list[float]:
    """Log-spaced in beta + 1 over [lo, hi], plus the `include` values that fall inside."""
    if lo <= -1 or hi <= lo:
        raise ValueError(f"Sweep range must satisfy -1 < lo < hi, got ({lo}, {hi})")
    if count < 2:
        raise ValueError(f"Sweep needs at least two points, got {count}")
    shifted = np.geomspace(lo + 1.0, hi + 1.0, count) - 1.0
    values = {float(v) for v in shifted}
    values.update(float(v) for v in include if lo <= v <= hi)
    return sorted(values)


def _sweep_row(
    family: str,
    beta: float,
    grid: DirectionGrid | None,
    tol: float,
    moment_tol: float,
    template: str | None,
) -> SweepRow:
    reference = None
    if normalize_family(family) != "custom":
        reference = closed_form_comparison_constant(family, beta)
    try:
        symbol = family_symbol(family, beta, template)
        report = compute_constants(symbol, tol=tol, grid=grid, moment_tol=moment_tol)
    except AnalysisError as exc:
        logger.warning("Sweep row failed: family=%s beta=%.6g code=%s detail=%s", family, beta, exc.code, exc.detail)
        return SweepRow(beta=beta, reference_c=reference, error=f"{exc.code}: {exc.detail}")
    return SweepRow(
        beta=beta,
        lower=report.lower,
        upper=report.upper,
        c=report.c,
        mu=report.mu,
        big_m=report.big_m,
        s=report.s,
        reference_c=reference,
    )


def sweep_family(
    family: str,
    betas: Sequence[float],
    grid: DirectionGrid | None = None,
    tol: float = OPT_TOL,
    *,
    template: str | None = None,
    workers: int = SWEEP_WORKERS,
    moment_tol: float = MOMENT_TOL,
) -> list[SweepRow]:
    """One row per beta, in input order. Row failures are recorded, not raised."""
    name = normalize_family(family)
    if name != "custom":
        bad = [b for b in betas if b <= -1]
        if bad:
            raise ValueError(f"Family parameter must exceed -1, got {bad}")
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        rows = list(executor.map(lambda beta: _sweep_row(name, float(beta), grid, tol, moment_tol, template), betas))
    failed = sum(1 for row in rows if not row.ok)
    logger.info("Sweep finished: family=%s rows=%d failed=%d", name, len(rows), failed)
    return rows
