"""Adaptive tensor Gauss-Legendre cubature on boxes with dyadic subdivision."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from frel.errors import ConvergenceError

logger = logging.getLogger(__name__)

# Tunables
HIGH_ORDER = 32
LOW_ORDER = 16
POINTS_PER_BATCH = 1 << 19
MARK_FRACTION = 0.5

PointFunc = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=16)
def tensor_rule(order: int, dimension: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [0, 1]^n and weights summing to 1."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = (nodes + 1.0) / 2.0
    weights = weights / 2.0
    mesh = np.meshgrid(*([nodes] * dimension), indexing="ij")
    points = np.stack(mesh, axis=-1).reshape(-1, dimension)
    weight_mesh = np.meshgrid(*([weights] * dimension), indexing="ij")
    tensor_weights = np.prod(np.stack(weight_mesh, axis=-1).reshape(-1, dimension), axis=1)
    points.setflags(write=False)
    tensor_weights.setflags(write=False)
    return points, tensor_weights


@dataclass(frozen=True)
class CubatureResult:
    value: float
    error: float
    cells: int
    max_level: int


def _cell_integrals(func: PointFunc, lo: np.ndarray, hi: np.ndarray, order: int) -> np.ndarray:
    dimension = lo.shape[1]
    nodes, weights = tensor_rule(order, dimension)
    per_cell = nodes.shape[0]
    chunk = max(1, POINTS_PER_BATCH // per_cell)
    out = np.empty(lo.shape[0])
    for start in range(0, lo.shape[0], chunk):
        cell_lo = lo[start : start + chunk]
        span = hi[start : start + chunk] - cell_lo
        points = cell_lo[:, None, :] + span[:, None, :] * nodes[None, :, :]
        values = func(points.reshape(-1, dimension)).reshape(cell_lo.shape[0], per_cell)
        out[start : start + chunk] = (values @ weights) * np.prod(span, axis=1)
    return out


CellKey = tuple[int, tuple[int, ...]]


def _split(lo: np.ndarray, hi: np.ndarray, keys: list[CellKey]):
    """Children of each cell, in corner order; keys are (level, dyadic index)."""
    dimension = lo.shape[1]
    mid = (lo + hi) / 2
    corners = np.array(np.meshgrid(*([[0, 1]] * dimension), indexing="ij")).reshape(dimension, -1).T
    child_lo, child_hi, child_keys = [], [], []
    for index, (level, key) in enumerate(keys):
        for corner in corners:
            upper = corner.astype(bool)
            child_lo.append(np.where(upper, mid[index], lo[index]))
            child_hi.append(np.where(upper, hi[index], mid[index]))
            child_keys.append((level + 1, tuple(2 * k + int(c) for k, c in zip(key, corner, strict=True))))
    return np.array(child_lo), np.array(child_hi), child_keys


def _marked(errors: np.ndarray, total: float) -> np.ndarray:
    """Smallest set of largest-error cells carrying MARK_FRACTION of the total error."""
    order = np.argsort(-errors, kind="stable")
    cumulative = np.cumsum(errors[order])
    count = int(np.searchsorted(cumulative, MARK_FRACTION * total)) + 1
    return np.sort(order[: min(count, errors.shape[0])])


def adaptive_cubature(
    func: PointFunc,
    lo: list[float] | np.ndarray,
    hi: list[float] | np.ndarray,
    tol: float,
    max_cells: int,
) -> CubatureResult:
    """Integrate func over the box [lo, hi] to relative tolerance tol.

    Each leaf cell carries a high-order value and the difference to the
    low-order rule as its error. While the summed error exceeds tol times the
    integral estimate, the cells holding the largest share of the error are
    split into 2^n dyadic children. The final sum runs over leaves in key
    order, so the result does not depend on how cells were batched.
    """
    box_lo = np.asarray(lo, dtype=float)[None, :]
    box_hi = np.asarray(hi, dtype=float)[None, :]
    if float(np.prod(box_hi - box_lo)) <= 0:
        return CubatureResult(value=0.0, error=0.0, cells=0, max_level=0)

    dimension = box_lo.shape[1]
    cell_lo, cell_hi = box_lo, box_hi
    keys: list[CellKey] = [(0, (0,) * dimension)]
    values = _cell_integrals(func, cell_lo, cell_hi, HIGH_ORDER)
    errors = np.abs(values - _cell_integrals(func, cell_lo, cell_hi, LOW_ORDER))
    cells = 1
    rounds = 0
    while True:
        estimate = math.fsum(values.tolist())
        total_error = math.fsum(errors.tolist())
        if total_error <= tol * abs(estimate):
            break
        marked = _marked(errors, total_error)
        cells += marked.size * (2**dimension - 1)
        if cells > max_cells:
            raise ConvergenceError(
                f"Cubature exceeded {max_cells} cells after {rounds} rounds "
                f"(estimate={estimate:.6e}, error={total_error:.3e})"
            )
        child_lo, child_hi, child_keys = _split(cell_lo[marked], cell_hi[marked], [keys[i] for i in marked])
        child_values = _cell_integrals(func, child_lo, child_hi, HIGH_ORDER)
        child_errors = np.abs(child_values - _cell_integrals(func, child_lo, child_hi, LOW_ORDER))
        keep = np.ones(len(keys), dtype=bool)
        keep[marked] = False
        cell_lo = np.concatenate((cell_lo[keep], child_lo))
        cell_hi = np.concatenate((cell_hi[keep], child_hi))
        keys = [key for key, k in zip(keys, keep, strict=True) if k] + child_keys
        values = np.concatenate((values[keep], child_values))
        errors = np.concatenate((errors[keep], child_errors))
        rounds += 1
        logger.debug("Cubature refine: round=%d leaves=%d error=%.3e", rounds, len(keys), total_error)

    order = sorted(range(len(keys)), key=keys.__getitem__)
    value = math.fsum(float(values[i]) for i in order)
    error = math.fsum(float(errors[i]) for i in order)
    max_level = max(level for level, _ in keys)
    return CubatureResult(value=value, error=error, cells=cells, max_level=max_level)
