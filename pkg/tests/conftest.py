import logging

import pytest

from frel.analysis.finsler import build_norm_table
from frel.analysis.polynomial import family_symbol, parse
from frel.models.norms import DirectionGrid, NormTable
from frel.models.polynomial import SymbolPolynomial
from tests.oracles import load_h0_oracle

BILAPLACIAN = "x1^4 + 2*x1^2*x2^2 + x2^4"
NOT_ELLIPTIC = "x1^4 - 4*x1^2*x2^2 + x2^4"

_TABLES: dict[tuple[str, int, float], NormTable] = {}


def cached_table(symbol: SymbolPolynomial, grid: DirectionGrid | None = None) -> NormTable:
    """Norm tables are the expensive part of most tests; build each one once per session."""
    grid = grid or DirectionGrid()
    key = (symbol.text, grid.points, grid.tol)
    if key not in _TABLES:
        _TABLES[key] = build_norm_table(symbol, grid)
    return _TABLES[key]


@pytest.fixture(autouse=True)
def _reset_logging_setup(monkeypatch):
    monkeypatch.setattr("cli.observability._configured_key", None)
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
            handler.close()
    for handler in handlers:
        if handler not in root.handlers:
            root.addHandler(handler)
    root.setLevel(level)


@pytest.fixture(scope="session")
def table_for():
    return cached_table


@pytest.fixture
def bilaplacian() -> SymbolPolynomial:
    return parse(BILAPLACIAN)


@pytest.fixture
def h0() -> SymbolPolynomial:
    return family_symbol("example1", 0)


@pytest.fixture
def h2() -> SymbolPolynomial:
    return family_symbol("example1", 2)


@pytest.fixture
def hhat3() -> SymbolPolynomial:
    return family_symbol("example2", 3)


@pytest.fixture(scope="session")
def h0_oracle() -> tuple[float, float]:
    return load_h0_oracle()
