"""The Finsler norm F = H^(1/2m), its dual F* and the biconjugate F**.

Planar symbols get the certified path: a dense angular scan followed by
golden-section refinement. Higher dimensions get a sampled search that is
logged as non-certified. Everything built on a NormTable is planar only.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from frel.analysis.polynomial import DEFAULT_SEED, ELLIPTIC_TOL, min_max_on_sphere
from frel.errors import (
    ConvergenceError,
    DimensionError,
    NotEllipticError,
    TableMismatchError,
    UnsupportedDimensionError,
)
from frel.models.norms import DirectionGrid, NormTable
from frel.models.polynomial import SymbolPolynomial, evaluate, evaluate_array
from frel.utils.optimize import circle_points, golden_section, golden_section_scalar, sphere_samples

logger = logging.getLogger(__name__)

# Tunables
SCAN_POINTS = 4096
ANGLE_XTOL = 1e-10
BICONJUGATE_XTOL = 1e-9
SCAN_CHUNK_ELEMENTS = 1 << 22
SAMPLED_POINTS_LOG2 = 15
DUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CircleScan:
    """Unit-circle samples of 1/F used to seed every planar dual-norm search."""

    symbol: SymbolPolynomial
    angles: np.ndarray
    scaled_points: np.ndarray
    terms: tuple[tuple[float, int, int], ...]
    exponent: float

    @property
    def step(self) -> float:
        return float(self.angles[1] - self.angles[0])

    def norm_at(self, phi: float) -> float:
        c, s = math.cos(phi), math.sin(phi)
        return math.fsum(coef * c**a * s**b for coef, a, b in self.terms) ** self.exponent

    def norm_array(self, phi: np.ndarray) -> np.ndarray:
        return evaluate_array(self.symbol, circle_points(phi)) ** self.exponent


@lru_cache(maxsize=256)
def circle_scan(symbol: SymbolPolynomial) -> CircleScan:
    if symbol.dimension != 2:
        raise UnsupportedDimensionError(f"Planar scan requested for a symbol in dimension {symbol.dimension}")
    extrema = min_max_on_sphere(symbol)
    if extrema.lower < ELLIPTIC_TOL:
        raise NotEllipticError(f"Symbol {symbol.text} is not elliptic: min on the circle is {extrema.lower:.6g}")
    angles = 2.0 * math.pi * np.arange(SCAN_POINTS) / SCAN_POINTS
    exponent = 1.0 / symbol.degree
    norms = evaluate_array(symbol, circle_points(angles)) ** exponent
    scaled = circle_points(angles) / norms[:, None]
    for array in (angles, scaled):
        array.setflags(write=False)
    terms = tuple((float(c), alpha[0], alpha[1]) for alpha, c in symbol.terms)
    return CircleScan(symbol=symbol, angles=angles, scaled_points=scaled, terms=terms, exponent=exponent)


def _require_planar(symbol: SymbolPolynomial) -> None:
    if symbol.dimension != 2:
        raise UnsupportedDimensionError(f"Norm tables are planar only, symbol has dimension {symbol.dimension}")


def check_table(symbol: SymbolPolynomial, table: NormTable) -> None:
    if table.symbol_text != symbol.text or table.m != symbol.m:
        raise TableMismatchError(f"Norm table was built for {table.symbol_text!r}, not {symbol.text!r}")


def finsler_F(symbol: SymbolPolynomial, xi) -> float:
    value = float(evaluate(symbol, [float(v) for v in xi]))
    if value < 0:
        raise NotEllipticError(f"H is negative ({value:.6g}) at {tuple(xi)}; the symbol is not elliptic")
    return value ** (1.0 / symbol.degree)


def finsler_F_array(symbol: SymbolPolynomial, points: np.ndarray) -> np.ndarray:
    values = evaluate_array(symbol, points)
    if np.any(values < 0):
        raise NotEllipticError(f"H is negative somewhere on the given points; {symbol.text} is not elliptic")
    return values ** (1.0 / symbol.degree)


def _dual_at_angle(scan: CircleScan, theta: float, xtol: float) -> tuple[float, float]:
    ct, st = math.cos(theta), math.sin(theta)
    row = scan.scaled_points @ np.array([ct, st])
    index = int(np.argmax(row))
    center = float(scan.angles[index])
    step = scan.step

    def ratio(phi: float) -> float:
        return (ct * math.cos(phi) + st * math.sin(phi)) / scan.norm_at(phi)

    phi, value = golden_section_scalar(ratio, center - step, center + step, xtol, maximize=True)
    if value < row[index]:
        return float(row[index]), center
    return value, phi


def dual_norm_angles(
    symbol: SymbolPolynomial,
    angles: np.ndarray,
    xtol: float = ANGLE_XTOL,
) -> tuple[np.ndarray, np.ndarray]:
    """F* at unit directions given by angle, plus the angle of the maximizing xi."""
    scan = circle_scan(symbol)
    thetas = np.asarray(angles, dtype=float)
    values = np.empty(thetas.shape[0])
    supports = np.empty(thetas.shape[0])
    chunk = max(1, SCAN_CHUNK_ELEMENTS // SCAN_POINTS)
    step = scan.step
    for start in range(0, thetas.shape[0], chunk):
        block = thetas[start : start + chunk]
        directions = circle_points(block)
        matrix = directions @ scan.scaled_points.T
        index = np.argmax(matrix, axis=1)
        scanned = matrix[np.arange(block.shape[0]), index]
        centers = scan.angles[index]

        def ratio(phi: np.ndarray, directions=directions) -> np.ndarray:
            dots = directions[:, 0] * np.cos(phi) + directions[:, 1] * np.sin(phi)
            return dots / scan.norm_array(phi)

        phi, refined = golden_section(ratio, centers - step, centers + step, xtol, maximize=True)
        better = refined >= scanned
        values[start : start + chunk] = np.where(better, refined, scanned)
        supports[start : start + chunk] = np.where(better, phi, centers)
    return values, np.mod(supports, 2.0 * math.pi)


def _sampled_dual_norm(symbol: SymbolPolynomial, omega: np.ndarray, seed: int) -> float:
    points = sphere_samples(symbol.dimension, SAMPLED_POINTS_LOG2, seed)
    norms = finsler_F_array(symbol, points)
    if np.min(norms) <= 0:
        raise NotEllipticError(f"Symbol {symbol.text} vanishes on the sphere")
    ratios = (points @ omega) / norms
    start = points[int(np.argmax(ratios))]

    def negative_ratio(x: np.ndarray) -> float:
        norm = float(np.linalg.norm(x))
        if norm == 0:
            return 0.0
        unit = x / norm
        return -float(unit @ omega) / float(finsler_F_array(symbol, unit[None, :])[0])

    result = minimize(negative_ratio, start, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    value = max(float(np.max(ratios)), -float(result.fun))
    logger.warning("Non-certified dual norm: dimension=%d value=%.12g", symbol.dimension, value)
    return value


def dual_norm(symbol: SymbolPolynomial, omega, tol: float = DUAL_TOL, seed: int = DEFAULT_SEED) -> float:
    """F*(omega) = max over unit xi of omega.xi / F(xi)."""
    vector = np.asarray([float(v) for v in omega])
    if vector.shape[0] != symbol.dimension:
        raise DimensionError(f"Direction has dimension {vector.shape[0]}, symbol has {symbol.dimension}")
    length = float(np.linalg.norm(vector))
    if length == 0:
        return 0.0
    if symbol.dimension != 2:
        return length * _sampled_dual_norm(symbol, vector / length, seed)
    value, _ = _dual_at_angle(circle_scan(symbol), math.atan2(vector[1], vector[0]), min(tol, ANGLE_XTOL))
    return length * value


def _moments(values: np.ndarray, angles: np.ndarray, m: int) -> np.ndarray:
    c, s = np.cos(angles), np.sin(angles)
    weights = values ** (-2 * m)
    return np.array([np.mean(c**k * s ** (2 * m - k) * weights) for k in range(2 * m + 1)])


def _moment_gap(fine: np.ndarray, coarse: np.ndarray) -> float:
    scale = float(np.max(np.abs(fine)))
    return float(np.max(np.abs(fine - coarse))) / scale


def _interleave(even: np.ndarray, odd: np.ndarray) -> np.ndarray:
    merged = np.empty(even.shape[0] + odd.shape[0])
    merged[0::2] = even
    merged[1::2] = odd
    return merged


def _make_table(
    symbol: SymbolPolynomial,
    grid: DirectionGrid,
    values: np.ndarray,
    supports: np.ndarray,
    gap: float,
) -> NormTable:
    return NormTable(
        symbol_text=symbol.text,
        m=symbol.m,
        grid=grid,
        values=values,
        support_angles=supports,
        moments=_moments(values, grid.angles(), symbol.m),
        achieved_tol=gap,
    )


def _odd_half(symbol: SymbolPolynomial, grid: DirectionGrid) -> tuple[np.ndarray, np.ndarray]:
    odd_angles = grid.angles() + grid.step / 2
    return dual_norm_angles(symbol, odd_angles)


def refine_table(symbol: SymbolPolynomial, table: NormTable) -> NormTable:
    """One doubling step; even-indexed values are reused from the current table."""
    check_table(symbol, table)
    if table.grid.points * 2 > table.grid.max_points:
        raise ConvergenceError(f"Norm table cannot grow past {table.grid.max_points} points")
    odd_values, odd_supports = _odd_half(symbol, table.grid)
    grid = table.grid.doubled()
    values = _interleave(table.values, odd_values)
    supports = _interleave(table.support_angles, odd_supports)
    moments = _moments(values, grid.angles(), symbol.m)
    gap = _moment_gap(moments, table.moments)
    logger.debug("Refined norm table: points=%d gap=%.3e", grid.points, gap)
    return _make_table(symbol, grid, values, supports, gap)


def build_norm_table(symbol: SymbolPolynomial, grid: DirectionGrid | None = None) -> NormTable:
    """Tabulate F* on the grid, doubling until the angular moments settle to grid.tol."""
    _require_planar(symbol)
    grid = grid or DirectionGrid()
    values, supports = dual_norm_angles(symbol, grid.angles())
    while True:
        moments = _moments(values, grid.angles(), symbol.m)
        coarse = _moments(values[0::2], grid.angles()[0::2], symbol.m)
        gap = _moment_gap(moments, coarse)
        if gap <= grid.tol:
            break
        if grid.points * 2 > grid.max_points:
            raise ConvergenceError(
                f"Norm table for {symbol.text} did not settle: gap={gap:.3e} tol={grid.tol:.1e} "
                f"at {grid.points} points"
            )
        odd_values, odd_supports = _odd_half(symbol, grid)
        values = _interleave(values, odd_values)
        supports = _interleave(supports, odd_supports)
        grid = grid.doubled()
        logger.debug("Doubled norm table: symbol=%s points=%d gap=%.3e", symbol.text, grid.points, gap)
    table = _make_table(symbol, grid, values, supports, gap)
    logger.info("Built norm table: symbol=%s points=%d achieved_tol=%.3e", symbol.text, grid.points, gap)
    return table


def biconjugate_angles(table: NormTable, angles: np.ndarray) -> np.ndarray:
    """Discrete second transform max_j xi.omega_j / F*_j at unit directions.

    This is the gauge of the polygon cut out by the tabulated support lines, so
    it never exceeds the true F** (and hence never exceeds F).
    """
    phis = np.asarray(angles, dtype=float)
    scaled = table.directions() / table.values[:, None]
    out = np.empty(phis.shape[0])
    chunk = max(1, SCAN_CHUNK_ELEMENTS // table.points)
    for start in range(0, phis.shape[0], chunk):
        block = circle_points(phis[start : start + chunk])
        out[start : start + chunk] = np.max(block @ scaled.T, axis=1)
    return out


def _refined_biconjugate(symbol: SymbolPolynomial, table: NormTable, phi: float) -> tuple[float, float]:
    """F** at the unit direction phi, and the angle of the maximizing omega."""
    scan = circle_scan(symbol)
    cp, sp = math.cos(phi), math.sin(phi)
    row = (table.directions() @ np.array([cp, sp])) / table.values
    index = int(np.argmax(row))
    center = float(table.angles()[index])
    step = table.grid.step

    def ratio(theta: float) -> float:
        dot = cp * math.cos(theta) + sp * math.sin(theta)
        if dot <= 0:
            return 0.0
        value, _ = _dual_at_angle(scan, theta, ANGLE_XTOL)
        return dot / value

    theta, refined = golden_section_scalar(ratio, center - step, center + step, BICONJUGATE_XTOL, maximize=True)
    if refined < row[index]:
        refined, theta = float(row[index]), center
    return min(refined, scan.norm_at(phi)), math.fmod(theta + 4.0 * math.pi, 2.0 * math.pi)


def biconjugate(symbol: SymbolPolynomial, xi, table: NormTable) -> float:
    """F**(xi), refined between table angles with exact dual norms; never above F(xi)."""
    check_table(symbol, table)
    vector = [float(v) for v in xi]
    if len(vector) != 2:
        raise DimensionError(f"Vector has dimension {len(vector)}, table is planar")
    length = math.hypot(*vector)
    if length == 0:
        return 0.0
    value, _ = _refined_biconjugate(symbol, table, math.atan2(vector[1], vector[0]))
    return length * value


def biconjugate_direction(symbol: SymbolPolynomial, table: NormTable, phi: float) -> tuple[float, float]:
    check_table(symbol, table)
    return _refined_biconjugate(symbol, table, phi)


def equality_direction(symbol: SymbolPolynomial, table: NormTable) -> tuple[float, float]:
    """A table angle where F**/F is largest, with the refined ratio there (1 up to tolerance)."""
    check_table(symbol, table)
    angles = table.angles()
    ratios = biconjugate_angles(table, angles) / circle_scan(symbol).norm_array(angles)
    index = int(np.argmax(ratios))
    phi = float(angles[index])
    refined, _ = _refined_biconjugate(symbol, table, phi)
    return phi, refined / circle_scan(symbol).norm_at(phi)


def dual_table_columns(symbol: SymbolPolynomial, table: NormTable) -> np.ndarray:
    """(points, 4) array of angle, F*, discrete F** and F at the table angles."""
    check_table(symbol, table)
    angles = table.angles()
    return np.column_stack(
        (angles, table.values, biconjugate_angles(table, angles), circle_scan(symbol).norm_array(angles))
    )
