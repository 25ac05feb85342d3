from __future__ import annotations

from enum import StrEnum


class ErrorCode(StrEnum):
    SYNTAX = "SYNTAX"
    NON_HOMOGENEOUS = "NON_HOMOGENEOUS"
    ODD_DEGREE = "ODD_DEGREE"
    UNBOUND_PARAMETER = "UNBOUND_PARAMETER"
    ZERO_SYMBOL = "ZERO_SYMBOL"
    DIMENSION_MISMATCH = "DIMENSION_MISMATCH"
    NOT_ELLIPTIC = "NOT_ELLIPTIC"
    CONVERGENCE = "CONVERGENCE"
    STALE_TABLE = "STALE_TABLE"
    INVALID_DOMAIN = "INVALID_DOMAIN"
    INVALID_TEST_FUNCTION = "INVALID_TEST_FUNCTION"
    UNSUPPORTED_DIMENSION = "UNSUPPORTED_DIMENSION"


class AnalysisError(ValueError):
    code: ErrorCode = ErrorCode.SYNTAX

    def __init__(self, detail: str, code: ErrorCode | str | None = None) -> None:
        super().__init__(detail)
        self.detail = detail
        if code is not None:
            self.code = ErrorCode(code)

    def payload(self) -> dict[str, str]:
        return {"code": str(self.code), "detail": self.detail}


class SymbolError(AnalysisError):
    """Raised when a polynomial cannot be turned into an operator symbol."""


class PolynomialSyntaxError(SymbolError):
    code = ErrorCode.SYNTAX

    def __init__(self, detail: str, position: int) -> None:
        super().__init__(f"{detail} at position {position}")
        self.position = position


class DimensionError(AnalysisError):
    code = ErrorCode.DIMENSION_MISMATCH


class NotEllipticError(AnalysisError):
    code = ErrorCode.NOT_ELLIPTIC


class ConvergenceError(AnalysisError):
    code = ErrorCode.CONVERGENCE


class TableMismatchError(AnalysisError):
    code = ErrorCode.STALE_TABLE


class DomainError(AnalysisError):
    code = ErrorCode.INVALID_DOMAIN


class TestFunctionError(AnalysisError):
    code = ErrorCode.INVALID_TEST_FUNCTION
    __test__ = False


class UnsupportedDimensionError(AnalysisError):
    code = ErrorCode.UNSUPPORTED_DIMENSION
