"""Exact multivariate polynomials with rational coefficients and the operator symbols built on them."""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any

import numpy as np

from frel.errors import DimensionError, ErrorCode, SymbolError
from frel.models.types import MultiIndex, check_multi_index, multi_index_order

Rational = Fraction | int


def _graded_lex_key(alpha: MultiIndex) -> tuple[int, tuple[int, ...]]:
    return (-multi_index_order(alpha), tuple(-a for a in alpha))


def _normalize_terms(terms: Mapping[MultiIndex, Rational] | Iterable[tuple[MultiIndex, Rational]]):
    items = terms.items() if isinstance(terms, Mapping) else terms
    merged: dict[MultiIndex, Fraction] = {}
    for alpha, coefficient in items:
        key = tuple(int(a) for a in alpha)
        merged[key] = merged.get(key, Fraction(0)) + Fraction(coefficient)
    cleaned = [(alpha, c) for alpha, c in merged.items() if c != 0]
    cleaned.sort(key=lambda item: _graded_lex_key(item[0]))
    return tuple(cleaned)


@dataclass(frozen=True, init=False)
class Polynomial:
    dimension: int
    terms: tuple[tuple[MultiIndex, Fraction], ...]

    def __init__(
        self,
        dimension: int,
        terms: Mapping[MultiIndex, Rational] | Iterable[tuple[MultiIndex, Rational]] = (),
    ) -> None:
        if dimension < 1:
            raise DimensionError(f"Polynomial dimension must be positive, got {dimension}")
        normalized = _normalize_terms(terms)
        for alpha, _ in normalized:
            check_multi_index(alpha, dimension)
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "terms", normalized)

    @classmethod
    def zero(cls, dimension: int) -> Polynomial:
        return cls(dimension)

    @classmethod
    def constant(cls, dimension: int, value: Rational) -> Polynomial:
        return cls(dimension, {(0,) * dimension: value})

    @classmethod
    def variable(cls, dimension: int, index: int) -> Polynomial:
        """The coordinate x_{index+1} (0-based index)."""
        if not 0 <= index < dimension:
            raise DimensionError(f"Variable index {index} outside dimension {dimension}")
        alpha = tuple(1 if i == index else 0 for i in range(dimension))
        return cls(dimension, {alpha: 1})

    @classmethod
    def monomial(cls, alpha: MultiIndex, coefficient: Rational = 1) -> Polynomial:
        return cls(len(alpha), {tuple(alpha): coefficient})

    @property
    def coefficients(self) -> dict[MultiIndex, Fraction]:
        return dict(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        if not self.terms:
            return -1
        return max(multi_index_order(alpha) for alpha, _ in self.terms)

    @property
    def degrees(self) -> set[int]:
        return {multi_index_order(alpha) for alpha, _ in self.terms}

    def _check_same_dimension(self, other: Polynomial) -> None:
        if other.dimension != self.dimension:
            raise DimensionError(f"Dimension mismatch: {self.dimension} vs {other.dimension}")

    def _coerce(self, other: Any) -> Polynomial:
        if isinstance(other, Polynomial):
            self._check_same_dimension(other)
            return other
        if isinstance(other, int | Fraction):
            return Polynomial.constant(self.dimension, other)
        return NotImplemented

    def __add__(self, other: Any) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Polynomial(self.dimension, [*self.terms, *other.terms])

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self.dimension, [(alpha, -c) for alpha, c in self.terms])

    def __sub__(self, other: Any) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other: Any) -> Polynomial:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        products: dict[MultiIndex, Fraction] = {}
        for alpha, a in self.terms:
            for beta, b in other.terms:
                key = tuple(x + y for x, y in zip(alpha, beta, strict=True))
                products[key] = products.get(key, Fraction(0)) + a * b
        return Polynomial(self.dimension, products)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> Polynomial:
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError(f"Polynomial exponent must be a non-negative integer, got {exponent!r}")
        result = Polynomial.constant(self.dimension, 1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def scale(self, factor: Rational) -> Polynomial:
        return Polynomial(self.dimension, [(alpha, c * Fraction(factor)) for alpha, c in self.terms])

    @cached_property
    def _float_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.terms:
            return np.zeros((0, self.dimension), dtype=np.int64), np.zeros(0)
        exponents = np.array([alpha for alpha, _ in self.terms], dtype=np.int64)
        coefficients = np.array([float(c) for _, c in self.terms])
        return exponents, coefficients

    def __str__(self) -> str:
        from frel.utils.grammar import format_polynomial  # noqa: PLC0415

        return format_polynomial(self)


@dataclass(frozen=True, init=False)
class SymbolPolynomial:
    """Homogeneous polynomial of even degree 2m: the symbol H(xi) of a constant-coefficient operator."""

    polynomial: Polynomial
    m: int

    def __init__(self, polynomial: Polynomial, m: int | None = None) -> None:
        if polynomial.is_zero:
            raise SymbolError("Symbol is the zero polynomial", ErrorCode.ZERO_SYMBOL)
        degrees = polynomial.degrees
        if len(degrees) != 1:
            raise SymbolError(
                f"Symbol is not homogeneous: term degrees {sorted(degrees)}",
                ErrorCode.NON_HOMOGENEOUS,
            )
        degree = degrees.pop()
        if degree % 2 != 0 or degree == 0:
            raise SymbolError(f"Symbol degree must be even and positive, got {degree}", ErrorCode.ODD_DEGREE)
        if m is not None and 2 * m != degree:
            raise SymbolError(f"Symbol degree {degree} does not match 2m = {2 * m}", ErrorCode.NON_HOMOGENEOUS)
        object.__setattr__(self, "polynomial", polynomial)
        object.__setattr__(self, "m", degree // 2)

    @property
    def dimension(self) -> int:
        return self.polynomial.dimension

    @property
    def degree(self) -> int:
        return 2 * self.m

    @property
    def terms(self) -> tuple[tuple[MultiIndex, Fraction], ...]:
        return self.polynomial.terms

    @property
    def text(self) -> str:
        return str(self.polynomial)

    def __str__(self) -> str:
        return self.text


def evaluate(p: Polynomial | SymbolPolynomial, point: Iterable[Any]) -> Any:
    """Evaluate at a point; exact when every coordinate is an int or Fraction."""
    poly = p.polynomial if isinstance(p, SymbolPolynomial) else p
    coords = list(point)
    if len(coords) != poly.dimension:
        raise DimensionError(f"Point has dimension {len(coords)}, polynomial has {poly.dimension}")
    exact = all(isinstance(x, int | Fraction) for x in coords)
    if exact:
        total = Fraction(0)
        for alpha, c in poly.terms:
            term = c
            for x, a in zip(coords, alpha, strict=True):
                if a:
                    term *= Fraction(x) ** a
            total += term
        return total
    values = [float(x) for x in coords]
    return math.fsum(
        float(c) * math.prod(x**a for x, a in zip(values, alpha, strict=True) if a) for alpha, c in poly.terms
    )


def evaluate_array(p: Polynomial | SymbolPolynomial, points: np.ndarray) -> np.ndarray:
    """Float evaluation at each row of a (k, n) array."""
    poly = p.polynomial if isinstance(p, SymbolPolynomial) else p
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != poly.dimension:
        raise DimensionError(f"Points have dimension {pts.shape[1]}, polynomial has {poly.dimension}")
    exponents, coefficients = poly._float_arrays
    result = np.zeros(pts.shape[0])
    for alpha, c in zip(exponents, coefficients, strict=True):
        term = np.full(pts.shape[0], c)
        for axis, a in enumerate(alpha):
            if a:
                term = term * pts[:, axis] ** int(a)
        result += term
    return result


def differentiate(p: Polynomial, alpha: MultiIndex) -> Polynomial:
    alpha = check_multi_index(tuple(alpha), p.dimension)
    derived: dict[MultiIndex, Fraction] = {}
    for beta, c in p.terms:
        if any(b < a for a, b in zip(alpha, beta, strict=True)):
            continue
        factor = 1
        for a, b in zip(alpha, beta, strict=True):
            factor *= math.perm(b, a)
        key = tuple(b - a for a, b in zip(alpha, beta, strict=True))
        derived[key] = derived.get(key, Fraction(0)) + c * factor
    return Polynomial(p.dimension, derived)


def apply_operator(symbol: SymbolPolynomial, u: Polynomial) -> Polynomial:
    """(-1)^m sum a_alpha D^alpha u."""
    if u.dimension != symbol.dimension:
        raise DimensionError(f"Test polynomial has dimension {u.dimension}, symbol has {symbol.dimension}")
    result = Polynomial.zero(u.dimension)
    for alpha, a in symbol.terms:
        result = result + differentiate(u, alpha).scale(a)
    return result.scale((-1) ** symbol.m)


def substitute(p: Polynomial, index: int, value: Rational) -> Polynomial:
    """Restrict to the hyperplane x_{index+1} = value; the dimension is kept."""
    if not 0 <= index < p.dimension:
        raise DimensionError(f"Variable index {index} outside dimension {p.dimension}")
    value = Fraction(value)
    restricted: dict[MultiIndex, Fraction] = {}
    for alpha, c in p.terms:
        key = tuple(0 if i == index else a for i, a in enumerate(alpha))
        restricted[key] = restricted.get(key, Fraction(0)) + c * value ** alpha[index]
    return Polynomial(p.dimension, restricted)


def integrate_box(p: Polynomial, box: Iterable[tuple[Rational, Rational]]) -> Fraction:
    bounds = [(Fraction(lo), Fraction(hi)) for lo, hi in box]
    if len(bounds) != p.dimension:
        raise DimensionError(f"Box has dimension {len(bounds)}, polynomial has {p.dimension}")
    for axis, (lo, hi) in enumerate(bounds):
        if lo > hi:
            raise ValueError(f"Box axis {axis} has lo > hi ({lo} > {hi})")
    total = Fraction(0)
    for alpha, c in p.terms:
        term = c
        for a, (lo, hi) in zip(alpha, bounds, strict=True):
            term *= (hi ** (a + 1) - lo ** (a + 1)) / (a + 1)
        total += term
    return total
