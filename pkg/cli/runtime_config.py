"""Environment-overridable defaults, read once at import. Bad values fall back to the default."""

import logging
import os
from collections.abc import Callable

_BOOL_WORDS = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _env_raw(name: str) -> str | None:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return None
    return raw.strip()


def _env_parsed[T](name: str, default: T, parse: Callable[[str], T], accept: Callable[[T], bool]) -> T:
    raw = _env_raw(name)
    if raw is None:
        return default
    try:
        value = parse(raw)
    except ValueError:
        return default
    return value if accept(value) else default


def _env_bool(name: str, default: bool) -> bool:
    raw = _env_raw(name)
    if raw is None:
        return default
    return _BOOL_WORDS.get(raw.lower(), default)


def _env_int(name: str, default: int, *, min_value: int = 1) -> int:
    """Integers below `min_value` are clamped up to it."""
    return max(_env_parsed(name, default, int, lambda _: True), min_value)


def _env_grid(name: str, default: int) -> int:
    """Table sizes are powers of two; other sizes round up to the next one."""
    points = _env_int(name, default, min_value=16)
    return 1 << (points - 1).bit_length()


def _env_tol(name: str, default: float) -> float:
    """Tolerances must lie in (0, 1)."""
    return _env_parsed(name, default, float, lambda value: 0.0 < value < 1.0)


def _env_log_level(name: str, default: str) -> str:
    return _env_parsed(name, default, str.upper, lambda level: isinstance(logging.getLevelName(level), int))


GRID_POINTS = _env_grid("FREL_GRID_POINTS", 4096)
MAX_GRID_POINTS = _env_grid("FREL_MAX_GRID_POINTS", 1 << 20)
GRID_TOL = _env_tol("FREL_GRID_TOL", 1e-8)
OPT_TOL = _env_tol("FREL_OPT_TOL", 1e-10)
MOMENT_TOL = _env_tol("FREL_MOMENT_TOL", 1e-10)
QUAD_TOL = _env_tol("FREL_QUAD_TOL", 1e-6)
QUAD_MAX_CELLS = _env_int("FREL_QUAD_MAX_CELLS", 1 << 20, min_value=1)
SEED = _env_int("FREL_SEED", 20240101, min_value=0)
SWEEP_POINTS = _env_int("FREL_SWEEP_POINTS", 200, min_value=2)
WORKERS = _env_int("FREL_WORKERS", 4, min_value=1)
LOG_LEVEL = _env_log_level("FREL_LOG_LEVEL", "WARNING")
LOG_JSON = _env_bool("FREL_LOG_JSON", False)
