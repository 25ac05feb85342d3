from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np

from frel.analysis.finsler import biconjugate, biconjugate_direction, check_table
from frel.errors import DimensionError, DomainError
from frel.models.domains import ConvexPolytope, HalfSpace
from frel.models.norms import NormTable
from frel.models.polynomial import SymbolPolynomial

logger = logging.getLogger(__name__)

AnyDomain = HalfSpace | ConvexPolytope


def _point(domain: AnyDomain, x: Sequence[float]) -> np.ndarray:
    point = np.asarray([float(v) for v in x])
    if point.shape[0] != domain.dimension:
        raise DimensionError(f"Point has dimension {point.shape[0]}, domain has {domain.dimension}")
    return point


def _slacks(domain: AnyDomain, point: np.ndarray) -> np.ndarray:
    """Positive exactly when the point is strictly inside."""
    if isinstance(domain, HalfSpace):
        return np.array([float(np.dot(domain.normal, point))])
    return domain.offsets - domain.normal_matrix @ point


def require_interior(domain: AnyDomain, x: Sequence[float]) -> np.ndarray:
    point = _point(domain, x)
    slacks = _slacks(domain, point)
    if np.min(slacks) <= 0:
        raise DomainError(f"Point {tuple(point)} is not strictly inside the domain (min slack {np.min(slacks):.3e})")
    return point


def directional_distance(domain: AnyDomain, x: Sequence[float], omega: Sequence[float]) -> float:
    """Distance from x to the boundary along the line through x with direction omega; inf if none."""
    point = require_interior(domain, x)
    direction = _point(domain, omega)
    if isinstance(domain, HalfSpace):
        rate = abs(float(np.dot(domain.normal, direction)))
        return math.inf if rate == 0 else float(np.dot(domain.normal, point)) / rate
    rates = np.abs(domain.normal_matrix @ direction)
    slacks = _slacks(domain, point)
    moving = rates > 0
    if not np.any(moving):
        return math.inf
    return float(np.min(slacks[moving] / rates[moving]))


def euclidean_distance(domain: AnyDomain, x: Sequence[float]) -> float:
    point = require_interior(domain, x)
    return float(np.min(_slacks(domain, point)))


def euclidean_distance_array(domain: AnyDomain, points: np.ndarray) -> np.ndarray:
    if isinstance(domain, HalfSpace):
        return points @ np.asarray(domain.normal)
    return np.min(domain.offsets[None, :] - points @ domain.normal_matrix.T, axis=1)


def face_weights(symbol: SymbolPolynomial, table: NormTable, domain: AnyDomain) -> np.ndarray:
    """F**(normal) for every face; the Finsler distance to a face's hyperplane is slack / weight."""
    check_table(symbol, table)
    normals = [domain.normal] if isinstance(domain, HalfSpace) else [face.normal for face in domain.faces]
    if len(normals[0]) != 2:
        raise DimensionError("Finsler distances use planar norm tables")
    return np.array([biconjugate(symbol, normal, table) for normal in normals])


def finsler_distance(symbol: SymbolPolynomial, table: NormTable, domain: AnyDomain, x: Sequence[float]) -> float:
    """d_H(x) = min over boundary points y of F*(x - y), via the per-face hyperplane formula."""
    point = require_interior(domain, x)
    weights = face_weights(symbol, table, domain)
    return float(np.min(_slacks(domain, point) / weights))


def finsler_distance_array(domain: AnyDomain, weights: np.ndarray, points: np.ndarray) -> np.ndarray:
    if isinstance(domain, HalfSpace):
        return (points @ np.asarray(domain.normal)) / weights[0]
    slacks = domain.offsets[None, :] - points @ domain.normal_matrix.T
    return np.min(slacks / weights[None, :], axis=1)


def minimizing_direction(symbol: SymbolPolynomial, table: NormTable, halfspace: HalfSpace) -> tuple[float, float]:
    """Unit theta minimizing F*(omega) / |normal . omega|, oriented into the half-space."""
    if halfspace.dimension != 2:
        raise DimensionError("Minimizing directions use planar norm tables")
    nx, ny = halfspace.normal
    _, theta = biconjugate_direction(symbol, table, math.atan2(ny, nx))
    direction = (math.cos(theta), math.sin(theta))
    if direction[0] * nx + direction[1] * ny < 0:
        direction = (-direction[0], -direction[1])
    return direction


def sample_boundary(polytope: ConvexPolytope, count: int) -> np.ndarray:
    """Counter-clockwise points around a bounded polygon: every vertex, plus `count` spread by arc length.

    Consecutive points (wrapping around) always lie on a common edge.
    """
    vertices = polytope.vertices()
    edges = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.linalg.norm(edges, axis=1)
    perimeter = float(lengths.sum())
    starts = np.concatenate(([0.0], np.cumsum(lengths)[:-1]))
    positions = np.union1d(perimeter * np.arange(count) / count, starts)
    edge_index = np.clip(np.searchsorted(starts, positions, side="right") - 1, 0, len(lengths) - 1)
    fraction = (positions - starts[edge_index]) / lengths[edge_index]
    return vertices[edge_index] + fraction[:, None] * edges[edge_index]
