from __future__ import annotations

from enum import IntEnum

from pydantic import ValidationError

from frel.errors import AnalysisError, ConvergenceError, NotEllipticError


class ExitCode(IntEnum):
    OK = 0
    PARSE = 2
    NOT_ELLIPTIC = 3
    CONVERGENCE = 4
    VERIFY_FAILED = 5


def exit_code_for(exc: BaseException) -> ExitCode:
    """Non-ellipticity and convergence get their own codes; every other input problem is a parse error."""
    if isinstance(exc, NotEllipticError):
        return ExitCode.NOT_ELLIPTIC
    if isinstance(exc, ConvergenceError):
        return ExitCode.CONVERGENCE
    return ExitCode.PARSE


def error_payload(code: str, detail: str) -> dict[str, str]:
    return {
        "code": str(code),
        "detail": detail,
    }


def payload_for(exc: BaseException) -> dict[str, str]:
    if isinstance(exc, AnalysisError):
        return error_payload(exc.code, exc.detail)
    if isinstance(exc, ValidationError):
        return error_payload("INVALID_CONFIG", str(exc))
    if isinstance(exc, OSError):
        return error_payload("IO_ERROR", str(exc))
    return error_payload("INVALID_ARGUMENT", str(exc))
