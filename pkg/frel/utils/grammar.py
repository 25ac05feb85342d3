"""Textual polynomial grammar.

    expr    := ['+' | '-'] term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := ('+' | '-') factor | power
    power   := primary ['^' INTEGER]
    primary := NUMBER | VARIABLE | PARAMETER | '(' expr ')'

VARIABLE is x1..x9, PARAMETER any other single letter, NUMBER an integer or
decimal literal. Division is only allowed by a nonzero constant, so `3/2*x1^2`
reads as a rational coefficient.
"""

from __future__ import annotations

import re
from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction

from frel.errors import ErrorCode, PolynomialSyntaxError, SymbolError
from frel.models.polynomial import Polynomial

_TOKEN_RE = re.compile(
    r"""
    (?P<space>\s+)
  | (?P<number>\d+(?:\.\d*)?|\.\d+)
  | (?P<variable>x[1-9])(?![0-9A-Za-z_])
  | (?P<name>[A-Za-z])(?![0-9A-Za-z_])
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if match is None:
            raise PolynomialSyntaxError(f"Unexpected character {text[position]!r}", position)
        kind = match.lastgroup or ""
        if kind != "space":
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


def _coerce_binding(name: str, value: object) -> Fraction:
    if isinstance(value, Fraction | int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SymbolError(f"Parameter {name!r} has non-rational value {value!r}", ErrorCode.UNBOUND_PARAMETER) from exc


class _Parser:
    def __init__(self, tokens: list[Token], dimension: int, bindings: Mapping[str, Fraction]) -> None:
        self.tokens = tokens
        self.index = 0
        self.dimension = dimension
        self.bindings = bindings

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def accept(self, *ops: str) -> Token | None:
        token = self.current
        if token.kind == "op" and token.text in ops:
            self.index += 1
            return token
        return None

    def parse(self) -> Polynomial:
        if self.current.kind == "end":
            raise PolynomialSyntaxError("Empty expression", 0)
        result = self.expr()
        if self.current.kind != "end":
            raise PolynomialSyntaxError(f"Unexpected {self.current.text!r}", self.current.position)
        return result

    def expr(self) -> Polynomial:
        negate = False
        if sign := self.accept("+", "-"):
            negate = sign.text == "-"
        result = self.term()
        if negate:
            result = -result
        while sign := self.accept("+", "-"):
            rhs = self.term()
            result = result + rhs if sign.text == "+" else result - rhs
        return result

    def term(self) -> Polynomial:
        result = self.factor()
        while op := self.accept("*", "/"):
            rhs = self.factor()
            if op.text == "*":
                result = result * rhs
                continue
            if rhs.degree > 0:
                raise PolynomialSyntaxError("Division by a non-constant expression", op.position)
            if rhs.is_zero:
                raise PolynomialSyntaxError("Division by zero", op.position)
            result = result.scale(1 / rhs.coefficients[(0,) * self.dimension])
        return result

    def factor(self) -> Polynomial:
        if sign := self.accept("+", "-"):
            inner = self.factor()
            return -inner if sign.text == "-" else inner
        return self.power()

    def power(self) -> Polynomial:
        base = self.primary()
        if self.accept("^"):
            token = self.current
            if token.kind != "number" or not token.text.isdigit():
                raise PolynomialSyntaxError("Exponent must be a non-negative integer", token.position)
            self.advance()
            return base ** int(token.text)
        return base

    def primary(self) -> Polynomial:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Polynomial.constant(self.dimension, Fraction(token.text))
        if token.kind == "variable":
            self.advance()
            return Polynomial.variable(self.dimension, int(token.text[1:]) - 1)
        if token.kind == "name":
            self.advance()
            if token.text not in self.bindings:
                raise SymbolError(
                    f"Unbound parameter {token.text!r} at position {token.position}",
                    ErrorCode.UNBOUND_PARAMETER,
                )
            return Polynomial.constant(self.dimension, self.bindings[token.text])
        if self.accept("("):
            inner = self.expr()
            if not self.accept(")"):
                raise PolynomialSyntaxError("Expected ')'", self.current.position)
            return inner
        if token.kind == "end":
            raise PolynomialSyntaxError("Unexpected end of expression", token.position)
        raise PolynomialSyntaxError(f"Unexpected {token.text!r}", token.position)


def parse_polynomial(
    text: str,
    bindings: Mapping[str, object] | None = None,
    dimension: int | None = None,
) -> Polynomial:
    """Parse text into an exact Polynomial. The dimension defaults to the highest variable index used."""
    tokens = tokenize(text)
    used = [int(t.text[1:]) for t in tokens if t.kind == "variable"]
    inferred = max(used, default=1)
    if dimension is None:
        dimension = inferred
    elif inferred > dimension:
        raise SymbolError(f"Expression uses x{inferred} but dimension is {dimension}", ErrorCode.DIMENSION_MISMATCH)
    resolved = {name: _coerce_binding(name, value) for name, value in (bindings or {}).items()}
    return _Parser(tokens, dimension, resolved).parse()


def _format_coefficient(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _format_monomial(alpha: tuple[int, ...]) -> str:
    factors = []
    for index, exponent in enumerate(alpha):
        if exponent == 0:
            continue
        factors.append(f"x{index + 1}" if exponent == 1 else f"x{index + 1}^{exponent}")
    return "*".join(factors)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero:
        return "0"
    parts: list[str] = []
    for alpha, coefficient in p.terms:
        magnitude = abs(coefficient)
        monomial = _format_monomial(alpha)
        if not monomial:
            body = _format_coefficient(magnitude)
        elif magnitude == 1:
            body = monomial
        else:
            body = f"{_format_coefficient(magnitude)}*{monomial}"
        if not parts:
            parts.append(f"-{body}" if coefficient < 0 else body)
        else:
            parts.append(f"- {body}" if coefficient < 0 else f"+ {body}")
    return " ".join(parts)
