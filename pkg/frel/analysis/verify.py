from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from fractions import Fraction

import numpy as np

from frel.analysis.constants import compute_constants, rellich_constant, stronger_bound
from frel.analysis.finsler import check_table, dual_norm_angles
from frel.analysis.geometry import AnyDomain, euclidean_distance_array, face_weights, finsler_distance_array
from frel.analysis.polynomial import family_symbol
from frel.analysis.rellich1d import sharp_ratio_halfspace
from frel.errors import DimensionError, DomainError, TestFunctionError
from frel.models.bumps import TestFunction
from frel.models.domains import ConvexPolytope, HalfSpace
from frel.models.norms import NormTable
from frel.models.polynomial import (
    Polynomial,
    SymbolPolynomial,
    apply_operator,
    differentiate,
    evaluate_array,
    integrate_box,
    substitute,
)
from frel.models.reports import ConstantsReport, DualityReport, QuotientReport, RemarkReport
from frel.models.types import normalize_family
from frel.utils.grammar import format_polynomial
from frel.utils.optimize import uniform_angles
from frel.utils.quadrature import CubatureResult, adaptive_cubature

logger = logging.getLogger(__name__)

# Tunables
QUAD_TOL = 1e-6
QUAD_MAX_CELLS = 1 << 20
DUALITY_THRESHOLD = -1e-9
DUALITY_BATCH = 1 << 14
REMARK_POINTS = 4096
REMARK_TOL = 1e-9
BOX_TOUCH_TOL = 1e-12
DEFAULT_SEED = 20240101


def bump(
    box: Sequence[tuple[Fraction | int | str, Fraction | int | str]],
    m: int,
    extra: Polynomial | None = None,
) -> TestFunction:
    """prod_i (x_i - a_i)^m (b_i - x_i)^m, optionally times `extra`."""
    bounds = [(Fraction(lo), Fraction(hi)) for lo, hi in box]
    dimension = len(bounds)
    u = Polynomial.constant(dimension, 1)
    for axis, (lo, hi) in enumerate(bounds):
        x = Polynomial.variable(dimension, axis)
        u = u * ((x - lo) ** m) * ((hi - x) ** m)
    label = f"bump(m={m})"
    if extra is not None:
        if extra.dimension != dimension:
            raise DimensionError(f"Extra factor has dimension {extra.dimension}, box has {dimension}")
        u = u * extra
        label = f"{label}*({format_polynomial(extra)})"
    test_function = TestFunction(polynomial=u, box=bounds, m=m, label=label)
    check_vanishing_order(test_function)
    return test_function


def vanishing_order_failures(u: Polynomial, box: Sequence[tuple[Fraction, Fraction]], m: int) -> list[str]:
    failures: list[str] = []
    for axis, (lo, hi) in enumerate(box):
        for endpoint in (lo, hi):
            derivative = u
            for k in range(m):
                if not substitute(derivative, axis, endpoint).is_zero:
                    failures.append(f"d^{k}/dx{axis + 1}^{k} u != 0 on x{axis + 1} = {endpoint}")
                    break
                derivative = differentiate(derivative, tuple(1 if i == axis else 0 for i in range(u.dimension)))
    return failures


def check_vanishing_order(test_function: TestFunction) -> None:
    if test_function.polynomial.is_zero:
        raise TestFunctionError("Test function is identically zero")
    if len(test_function.box) != test_function.dimension:
        raise DimensionError(f"Support box has {len(test_function.box)} axes, u has {test_function.dimension}")
    failures = vanishing_order_failures(test_function.polynomial, test_function.box, test_function.m)
    if failures:
        raise TestFunctionError(f"Test function does not vanish to order {test_function.m}: {'; '.join(failures)}")


def _check_pair(symbol: SymbolPolynomial, test_function: TestFunction) -> None:
    if test_function.dimension != symbol.dimension:
        raise DimensionError(f"Test function has dimension {test_function.dimension}, symbol {symbol.dimension}")
    if test_function.m < symbol.m:
        raise TestFunctionError(f"Test function vanishes to order {test_function.m}, the operator needs {symbol.m}")
    check_vanishing_order(test_function)


def energy(symbol: SymbolPolynomial, test_function: TestFunction) -> Fraction:
    """Exact integral of u * Hu over the support box."""
    _check_pair(symbol, test_function)
    u = test_function.polynomial
    return integrate_box(u * apply_operator(symbol, u), test_function.box)


def _split_index(alpha: tuple[int, ...], order: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    left = []
    remaining = order
    for a in alpha:
        take = min(a, remaining)
        left.append(take)
        remaining -= take
    beta = tuple(left)
    return beta, tuple(a - b for a, b in zip(alpha, beta, strict=True))


def energy_form(symbol: SymbolPolynomial, test_function: TestFunction) -> Fraction:
    """Dirichlet-form value sum a_alpha int D^beta u D^gamma u with alpha = beta + gamma, |beta| = |gamma| = m."""
    _check_pair(symbol, test_function)
    u = test_function.polynomial
    total = Fraction(0)
    for alpha, coefficient in symbol.terms:
        beta, gamma = _split_index(alpha, symbol.m)
        total += coefficient * integrate_box(differentiate(u, beta) * differentiate(u, gamma), test_function.box)
    return total


def _check_support(domain: AnyDomain, test_function: TestFunction) -> None:
    lo, hi = test_function.box_floats()
    corners = np.array(np.meshgrid(*zip(lo, hi, strict=True), indexing="ij")).reshape(len(lo), -1).T
    if isinstance(domain, HalfSpace):
        slacks = corners @ np.asarray(domain.normal)
    else:
        slacks = (domain.offsets[None, :] - corners @ domain.normal_matrix.T).min(axis=1)
    if np.min(slacks) < -BOX_TOUCH_TOL:
        raise DomainError(f"Support box {test_function.box} leaves the domain")


def weighted_mass(
    symbol: SymbolPolynomial,
    table: NormTable,
    domain: AnyDomain,
    test_function: TestFunction,
    tol: float = QUAD_TOL,
    max_cells: int = QUAD_MAX_CELLS,
    *,
    euclidean: bool = False,
) -> CubatureResult:
    """Integral of u^2 / d_H^(2m) over the support box, with an error estimate.

    `euclidean` swaps d_H for the Euclidean distance to the boundary.
    """
    _check_pair(symbol, test_function)
    _check_support(domain, test_function)
    weights = None if euclidean else face_weights(symbol, table, domain)
    u = test_function.polynomial
    power = 2 * symbol.m

    def integrand(points: np.ndarray) -> np.ndarray:
        if weights is None:
            distances = euclidean_distance_array(domain, points)
        else:
            distances = finsler_distance_array(domain, weights, points)
        return evaluate_array(u, points) ** 2 / distances**power

    lo, hi = test_function.box_floats()
    result = adaptive_cubature(integrand, lo, hi, tol, max_cells)
    logger.info(
        "Weighted mass: symbol=%s euclidean=%s value=%.12g error=%.3e cells=%d",
        symbol.text,
        euclidean,
        result.value,
        result.error,
        result.cells,
    )
    return result


def _report(
    kind: str,
    symbol: SymbolPolynomial,
    domain: AnyDomain,
    test_function: TestFunction,
    exact_energy: Fraction,
    mass: CubatureResult,
    bound: float,
    bound_name: str,
    tol: float,
    **extra,
) -> QuotientReport:
    ratio = float(exact_energy) / mass.value
    margin = ratio - bound
    return QuotientReport(
        kind=kind,
        symbol=symbol.text,
        domain=domain.model_dump(mode="json"),
        box=test_function.box,
        test_function=test_function.label or format_polynomial(test_function.polynomial),
        energy=exact_energy,
        weighted_mass=mass.value,
        mass_error=mass.error,
        mass_cells=mass.cells,
        ratio=ratio,
        bound=bound,
        bound_name=bound_name,
        margin=margin,
        passed=margin >= -tol,
        tol=tol,
        **extra,
    )


def verify_halfspace(
    symbol: SymbolPolynomial,
    table: NormTable,
    halfspace: HalfSpace,
    test_function: TestFunction,
    tol: float = QUAD_TOL,
    max_cells: int = QUAD_MAX_CELLS,
) -> QuotientReport:
    """Energy over weighted mass against A(m) on a half-space."""
    check_table(symbol, table)
    exact = energy(symbol, test_function)
    mass = weighted_mass(symbol, table, halfspace, test_function, tol, max_cells)
    report = _report(
        "halfspace",
        symbol,
        halfspace,
        test_function,
        exact,
        mass,
        float(rellich_constant(symbol.m)),
        "A(m)",
        tol,
        sharp_ratio=sharp_ratio_halfspace(symbol, table, halfspace.normal),
    )
    logger.info("Half-space check: symbol=%s ratio=%.9f margin=%.3e", symbol.text, report.ratio, report.margin)
    return report


def verify_convex(
    symbol: SymbolPolynomial,
    table: NormTable,
    polytope: ConvexPolytope,
    test_function: TestFunction,
    tol: float = QUAD_TOL,
    max_cells: int = QUAD_MAX_CELLS,
    constants: ConstantsReport | None = None,
) -> QuotientReport:
    """Energy over weighted mass against A(m) mu/M on a convex polytope; also reports A(m) lambda/Lambda."""
    check_table(symbol, table)
    constants = constants or compute_constants(symbol, table)
    exact = energy(symbol, test_function)
    mass = weighted_mass(symbol, table, polytope, test_function, tol, max_cells)
    report = _report(
        "convex",
        symbol,
        polytope,
        test_function,
        exact,
        mass,
        constants.theorem2,
        "A(m)*mu/M",
        tol,
        comparison_bound=constants.comparison,
        stronger=stronger_bound(constants.theorem2, constants.comparison),
    )
    logger.info("Convex check: symbol=%s ratio=%.9f margin=%.3e", symbol.text, report.ratio, report.margin)
    return report


def symbol_duality_check(
    symbol: SymbolPolynomial,
    table: NormTable | None = None,
    samples: int = 100_000,
    seed: int = DEFAULT_SEED,
) -> DualityReport:
    """Worst relative slack of H(xi) F*(omega)^(2m) >= (omega.xi)^(2m) over random pairs."""
    if table is not None:
        check_table(symbol, table)
    if symbol.dimension != 2:
        raise DimensionError("The duality check samples planar symbols")
    rng = np.random.default_rng(seed)
    power = 2 * symbol.m
    worst_slack = math.inf
    worst_xi = worst_omega = (0.0, 0.0)
    for start in range(0, samples, DUALITY_BATCH):
        count = min(DUALITY_BATCH, samples - start)
        xi = rng.standard_normal((count, 2))
        omega = rng.standard_normal((count, 2))
        lengths = np.linalg.norm(omega, axis=1)
        fstar, _ = dual_norm_angles(symbol, np.arctan2(omega[:, 1], omega[:, 0]))
        lhs = evaluate_array(symbol, xi) * (lengths * fstar) ** power
        rhs = np.einsum("ij,ij->i", xi, omega) ** power
        slack = (lhs - rhs) / np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
        index = int(np.argmin(slack))
        if slack[index] < worst_slack:
            worst_slack = float(slack[index])
            worst_xi = (float(xi[index, 0]), float(xi[index, 1]))
            worst_omega = (float(omega[index, 0]), float(omega[index, 1]))
    passed = worst_slack >= DUALITY_THRESHOLD
    logger.info("Duality check: symbol=%s samples=%d worst=%.3e", symbol.text, samples, worst_slack)
    return DualityReport(
        symbol=symbol.text,
        samples=samples,
        seed=seed,
        worst_slack=worst_slack,
        worst_xi=worst_xi,
        worst_omega=worst_omega,
        threshold=DUALITY_THRESHOLD,
        passed=passed,
    )


def remark_factors(family: str, beta: float) -> tuple[float, float]:
    """(lower, upper) with lower <= F*(xi)^(2m) <= upper on the unit circle."""
    name = normalize_family(family)
    if name == "example1":
        k = max(1.0, 2.0 / (beta + 1.0))
        return k / 4.0, k
    if name == "example2":
        k = max(1.0, 4.0 / (beta + 1.0))
        return k / 8.0, k
    raise ValueError("Remark bounds are stated for example1 and example2 only")


def remark_bounds_check(
    family: str,
    beta: float,
    table: NormTable | None = None,
    points: int = REMARK_POINTS,
) -> RemarkReport:
    """Check the dual-norm sandwich on a circle grid (the table's own grid when one is given)."""
    if beta <= -1:
        raise ValueError(f"Family parameter must exceed -1, got {beta}")
    symbol = family_symbol(family, beta)
    if table is not None:
        check_table(symbol, table)
        values = table.values
    else:
        values, _ = dual_norm_angles(symbol, uniform_angles(points))
    powered = values ** (2 * symbol.m)
    lower, upper = remark_factors(family, beta)
    lower_margin = float(np.min(powered) - lower) / lower
    upper_margin = float(upper - np.max(powered)) / upper
    return RemarkReport(
        family=normalize_family(family),
        beta=beta,
        m=symbol.m,
        lower_factor=lower,
        upper_factor=upper,
        points=values.shape[0],
        min_value=float(np.min(powered)),
        max_value=float(np.max(powered)),
        lower_margin=lower_margin,
        upper_margin=upper_margin,
        passed=lower_margin >= -REMARK_TOL and upper_margin >= -REMARK_TOL,
    )
