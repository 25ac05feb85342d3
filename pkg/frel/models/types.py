from fractions import Fraction
from typing import Literal

from frel.errors import DimensionError

Family = Literal["example1", "example2", "custom"]
OutputFormat = Literal["json", "csv"]
StrongerBound = Literal["theorem2", "comparison", "equal"]

MultiIndex = tuple[int, ...]

FAMILY_TEMPLATES: dict[str, str] = {
    "example1": "x1^4 + 2*b*x1^2*x2^2 + x2^4",
    "example2": "x1^6 + b*x1^4*x2^2 + b*x1^2*x2^4 + x2^6",
}
FAMILY_PARAMETER = "b"

# Parameter values at which a family collapses to a power of |xi|^2.
FAMILY_COLLAPSE_BETA: dict[str, Fraction] = {
    "example1": Fraction(1),
    "example2": Fraction(3),
}


def normalize_family(value: str | None) -> Family:
    if value in (None, "custom"):
        return "custom"
    if value in ("example1", "h", "H"):
        return "example1"
    if value in ("example2", "hhat", "Hhat"):
        return "example2"
    raise ValueError(f"Unknown symbol family: {value}")


def multi_index_order(alpha: MultiIndex) -> int:
    return sum(alpha)


def check_multi_index(alpha: MultiIndex, dimension: int) -> MultiIndex:
    if len(alpha) != dimension:
        raise DimensionError(f"Multi-index {alpha} has length {len(alpha)}, expected {dimension}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"Multi-index {alpha} has negative entries")
    return tuple(int(a) for a in alpha)
