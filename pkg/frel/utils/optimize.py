from __future__ import annotations

import math
from collections.abc import Callable

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0

ArrayFunc = Callable[[np.ndarray], np.ndarray]


def golden_section(
    func: ArrayFunc,
    lo: np.ndarray,
    hi: np.ndarray,
    xtol: float = 1e-9,
    *,
    maximize: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Batched golden-section search on independent brackets [lo_i, hi_i].

    `func` maps an array of abscissae (one per bracket) to values. Returns the
    best abscissae and their values. The iteration count is fixed up front from
    the widest bracket, so every row takes the same number of steps.
    """
    a = np.array(lo, dtype=float, copy=True)
    b = np.array(hi, dtype=float, copy=True)
    sign = -1.0 if maximize else 1.0

    def objective(x: np.ndarray) -> np.ndarray:
        return sign * func(x)

    width = float(np.max(b - a)) if a.size else 0.0
    if width <= xtol:
        mid = (a + b) / 2
        return mid, func(mid)

    steps = max(1, math.ceil(math.log(xtol / width) / math.log(INV_PHI)))
    dist = b - a
    c = a + INV_PHI_SQ * dist
    d = a + INV_PHI * dist
    yc = objective(c)
    yd = objective(d)
    for _ in range(steps - 1):
        left = yc < yd
        dist = INV_PHI * dist
        # left: keep [a, d]; otherwise keep [c, b]
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = np.where(left, a + INV_PHI_SQ * dist, d)
        new_d = np.where(left, c, a + INV_PHI * dist)
        probe = np.where(left, new_c, new_d)
        fresh = objective(probe)
        yc, yd = np.where(left, fresh, yd), np.where(left, yc, fresh)
        c, d = new_c, new_d

    x = np.where(yc < yd, (a + d) / 2, (c + b) / 2)
    fx = func(x)
    # the bracket ends were probed; never return something worse than the best probe
    best_probe = np.where(yc < yd, c, d)
    best_value = np.where(yc < yd, yc, yd) * sign
    keep_probe = (sign * fx) > (sign * best_value)
    return np.where(keep_probe, best_probe, x), np.where(keep_probe, best_value, fx)


def golden_section_scalar(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float = 1e-9,
    *,
    maximize: bool = False,
) -> tuple[float, float]:
    """Plain-float golden-section search; used on hot scalar paths where numpy call overhead dominates."""
    sign = -1.0 if maximize else 1.0
    a, b = lo, hi
    dist = b - a
    if dist <= xtol:
        mid = (a + b) / 2
        return mid, func(mid)

    steps = max(1, math.ceil(math.log(xtol / dist) / math.log(INV_PHI)))
    c = a + INV_PHI_SQ * dist
    d = a + INV_PHI * dist
    yc = sign * func(c)
    yd = sign * func(d)
    for _ in range(steps - 1):
        dist *= INV_PHI
        if yc < yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI_SQ * dist
            yc = sign * func(c)
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * dist
            yd = sign * func(d)

    x = (a + d) / 2 if yc < yd else (c + b) / 2
    fx = sign * func(x)
    best_x, best_y = (c, yc) if yc < yd else (d, yd)
    if best_y < fx:
        return best_x, sign * best_y
    return x, sign * fx


def sphere_samples(dimension: int, count_log2: int, seed: int) -> np.ndarray:
    """Scrambled Sobol points pushed to the unit sphere through the normal quantile map."""
    sampler = qmc.Sobol(d=dimension, scramble=True, seed=seed)
    uniform = sampler.random_base2(count_log2)
    uniform = np.clip(uniform, 1e-12, 1.0 - 1e-12)
    gaussian = ndtri(uniform)
    norms = np.linalg.norm(gaussian, axis=1, keepdims=True)
    return gaussian / np.where(norms > 0, norms, 1.0)


def circle_points(angles: np.ndarray) -> np.ndarray:
    return np.column_stack((np.cos(angles), np.sin(angles)))


def uniform_angles(count: int, period: float = 2.0 * math.pi) -> np.ndarray:
    return period * np.arange(count) / count
