from fractions import Fraction

import numpy as np
import pytest

from frel.analysis.polynomial import family_symbol, is_elliptic, min_max_on_sphere, parse
from frel.errors import DimensionError, ErrorCode, PolynomialSyntaxError, SymbolError
from frel.models.polynomial import (
    Polynomial,
    SymbolPolynomial,
    apply_operator,
    differentiate,
    evaluate,
    evaluate_array,
    integrate_box,
    substitute,
)
from frel.models.types import normalize_family
from frel.utils.grammar import format_polynomial, parse_polynomial
from tests.conftest import BILAPLACIAN, NOT_ELLIPTIC


def test_parse_bilaplacian_reports_half_order_and_canonical_text():
    symbol = parse("x1^4+2*x1^2*x2^2+x2^4")
    assert symbol.m == 2
    assert symbol.dimension == 2
    assert symbol.text == BILAPLACIAN


@pytest.mark.parametrize(
    "text",
    [
        "x1^4 + 2*x1^2*x2^2 + x2^4",
        "x1^6 - 3*x1^4*x2^2 + 3/2*x1^2*x2^4 + x2^6",
        "-x1^2 + 2*x1*x2",
        "x1^2 + x2^2 + x3^2",
    ],
)
def test_format_polynomial_round_trips_canonical_text(text):
    assert format_polynomial(parse_polynomial(text)) == text


def test_rational_coefficients_stay_exact():
    poly = parse_polynomial("3/2*x1^2 + 0.25*x2^2")
    assert poly.coefficients[(2, 0)] == Fraction(3, 2)
    assert poly.coefficients[(0, 2)] == Fraction(1, 4)


def test_dimension_is_inferred_from_highest_variable():
    assert parse_polynomial("x3^2 + x1^2").dimension == 3
    assert parse_polynomial("7").dimension == 1


def test_explicit_dimension_smaller_than_used_variables_is_rejected():
    with pytest.raises(SymbolError) as exc:
        parse_polynomial("x3^2", dimension=2)
    assert exc.value.code == ErrorCode.DIMENSION_MISMATCH


def test_syntax_error_reports_position():
    with pytest.raises(PolynomialSyntaxError) as exc:
        parse("x1^4 + * x2^4")
    assert exc.value.position == 7
    assert exc.value.code == ErrorCode.SYNTAX


@pytest.mark.parametrize(
    ("text", "position"),
    [
        ("x1^4 / x2", 5),
        ("x1^2.5", 3),
        ("(x1^2 + x2^2", 12),
        ("x1^2 $ x2^2", 5),
        ("", 0),
    ],
)
def test_malformed_input_is_a_syntax_error(text, position):
    with pytest.raises(PolynomialSyntaxError) as exc:
        parse(text)
    assert exc.value.position == position


@pytest.mark.parametrize(
    ("text", "code"),
    [
        ("x1^3 + x2^3", ErrorCode.ODD_DEGREE),
        ("x1^4 + x2^2", ErrorCode.NON_HOMOGENEOUS),
        ("x1^2 - x1^2", ErrorCode.ZERO_SYMBOL),
        ("x1^4 + b*x2^4", ErrorCode.UNBOUND_PARAMETER),
    ],
)
def test_invalid_symbols_are_rejected_with_codes(text, code):
    with pytest.raises(SymbolError) as exc:
        parse(text)
    assert exc.value.code == code


def test_bindings_substitute_parameters_exactly():
    symbol = parse("x1^4 + 2*b*x1^2*x2^2 + x2^4", {"b": "-1/2"})
    assert symbol.text == "x1^4 - x1^2*x2^2 + x2^4"


def test_family_symbols_match_their_templates():
    assert family_symbol("example1", 0).text == "x1^4 + x2^4"
    assert family_symbol("example1", 1).text == BILAPLACIAN
    assert family_symbol("example2", 3).text == "x1^6 + 3*x1^4*x2^2 + 3*x1^2*x2^4 + x2^6"
    assert family_symbol("hhat", Fraction(1, 2)).m == 3


def test_custom_family_needs_a_template():
    with pytest.raises(SymbolError):
        family_symbol("custom", 1)
    assert family_symbol("custom", 2, template="x1^2 + b*x2^2").text == "x1^2 + 2*x2^2"


def test_unknown_family_is_rejected():
    with pytest.raises(ValueError, match="Unknown symbol family"):
        normalize_family("example3")


def test_polynomial_arithmetic():
    x = Polynomial.variable(2, 0)
    y = Polynomial.variable(2, 1)
    assert (x + y) ** 2 == parse_polynomial("x1^2 + 2*x1*x2 + x2^2")
    assert (1 - x) * (1 + x) == parse_polynomial("1 - x1^2", dimension=2)
    assert (x - x).is_zero


def test_mixed_dimensions_do_not_combine():
    with pytest.raises(DimensionError):
        Polynomial.variable(2, 0) + Polynomial.variable(3, 0)


def test_differentiate_uses_falling_factorials():
    poly = parse_polynomial("x1^3*x2^2")
    assert differentiate(poly, (2, 1)) == parse_polynomial("12*x1*x2")
    assert differentiate(poly, (4, 0)).is_zero


def test_apply_operator_for_negative_laplacian():
    symbol = parse("x1^2 + x2^2")
    u = parse_polynomial("x1^2*x2^2")
    assert apply_operator(symbol, u) == parse_polynomial("-2*x1^2 - 2*x2^2")


def test_apply_operator_for_bilaplacian_has_no_sign_flip():
    u = parse_polynomial("x1^2*x2^2")
    assert apply_operator(parse(BILAPLACIAN), u) == parse_polynomial("8", dimension=2)


def test_integrate_box_is_exact():
    assert integrate_box(parse_polynomial("x1*x2"), [(0, 1), (0, 1)]) == Fraction(1, 4)
    assert integrate_box(parse_polynomial("x1^2", dimension=2), [(0, 1), (0, 2)]) == Fraction(2, 3)
    assert integrate_box(parse_polynomial("x1^3"), [(Fraction(-1), Fraction(1))]) == 0


@pytest.mark.parametrize("beta", [Fraction(-1, 2), 2, 7])
def test_apply_operator_is_linear(beta):
    symbol = family_symbol("example2", beta)
    u = parse_polynomial("x1^3*x2^3 - 2*x1^5*x2 + 1/3*x2^4")
    v = parse_polynomial("x1^6 + x1^2*x2^2 - 5", dimension=2)
    combined = apply_operator(symbol, u.scale(2) + v.scale(Fraction(-3, 7)))
    assert combined == apply_operator(symbol, u).scale(2) + apply_operator(symbol, v).scale(Fraction(-3, 7))


def test_integrate_box_agrees_with_monte_carlo():
    poly = parse_polynomial("1 + x1*x2^3 - 2*x1^2 + 3*x1^4*x2")
    box = [(0, 1), (-1, 2)]
    samples = 200_000
    rng = np.random.default_rng(11)
    points = np.column_stack((rng.uniform(0, 1, samples), rng.uniform(-1, 2, samples)))
    values = evaluate_array(poly, points) * 3.0
    standard_error = values.std(ddof=1) / np.sqrt(samples)
    assert abs(values.mean() - float(integrate_box(poly, box))) <= 3 * standard_error


def test_substitute_restricts_to_coordinate_hyperplane():
    poly = parse_polynomial("x1^2*x2 + x1")
    assert substitute(poly, 0, Fraction(1, 2)) == parse_polynomial("1/4*x2 + 1/2")


def test_evaluate_is_exact_for_rational_points():
    symbol = parse("x1^4 + x2^4")
    assert evaluate(symbol, [Fraction(1, 2), 1]) == Fraction(17, 16)


@pytest.mark.parametrize(("family", "beta"), [("example1", Fraction(-9, 10)), ("example1", 5), ("example2", 7)])
def test_symbol_is_homogeneous_of_degree_2m(family, beta):
    symbol = family_symbol(family, beta)
    rng = np.random.default_rng(5)
    for _ in range(20):
        point = [Fraction(int(v), 97) for v in rng.integers(-300, 300, size=2)]
        t = Fraction(int(rng.integers(1, 50)), int(rng.integers(1, 50)))
        assert evaluate(symbol, [t * x for x in point]) == t ** (2 * symbol.m) * evaluate(symbol, point)
    points = rng.standard_normal((200, 2))
    scales = rng.uniform(0.1, 10.0, size=200)
    np.testing.assert_allclose(
        evaluate_array(symbol, scales[:, None] * points),
        scales ** (2 * symbol.m) * evaluate_array(symbol, points),
        rtol=1e-12,
    )


@pytest.mark.parametrize(("family", "beta"), [("example1", Fraction(-1, 2)), ("example1", 5), ("example2", 7)])
def test_symbol_on_the_circle_stays_between_its_extremes(family, beta):
    symbol = family_symbol(family, beta)
    extrema = min_max_on_sphere(symbol)
    angles = np.random.default_rng(9).uniform(0.0, 2.0 * np.pi, 10_000)
    values = evaluate_array(symbol, np.column_stack((np.cos(angles), np.sin(angles))))
    assert values.min() >= extrema.lower - 1e-12
    assert values.max() <= extrema.upper + 1e-12


def test_evaluate_array_agrees_with_pointwise_evaluation():
    symbol = parse("x1^6 - 3*x1^4*x2^2 + 3/2*x1^2*x2^4 + x2^6")
    points = np.random.default_rng(3).standard_normal((50, 2))
    expected = [evaluate(symbol, row.tolist()) for row in points]
    assert evaluate_array(symbol, points) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_symbol_degree_must_match_requested_order():
    with pytest.raises(SymbolError):
        SymbolPolynomial(parse_polynomial("x1^4 + x2^4"), m=1)


def test_sphere_extremes_of_bilaplacian_are_one():
    extrema = min_max_on_sphere(parse(BILAPLACIAN))
    assert extrema.lower == pytest.approx(1.0, abs=1e-12)
    assert extrema.upper == pytest.approx(1.0, abs=1e-12)
    assert extrema.certified


def test_sphere_extremes_of_quartic_power_sum(h0):
    lower, upper = min_max_on_sphere(h0)
    assert lower == pytest.approx(0.5, abs=1e-12)
    assert upper == pytest.approx(1.0, abs=1e-12)


def test_sphere_extremes_match_closed_form_ratio():
    # H / |xi|^4 = 1 + (beta - 1)/2 sin^2(2 theta) for the first family
    lower, upper = min_max_on_sphere(family_symbol("example1", 5))
    assert lower == pytest.approx(1.0, abs=1e-12)
    assert upper == pytest.approx(3.0, abs=1e-12)


def test_sampled_sphere_search_in_three_dimensions_is_not_certified():
    extrema = min_max_on_sphere(parse("x1^4 + x2^4 + x3^4"))
    assert not extrema.certified
    assert extrema.lower == pytest.approx(1 / 3, rel=1e-6)
    assert extrema.upper == pytest.approx(1.0, rel=1e-6)


def test_ellipticity():
    assert is_elliptic(parse(BILAPLACIAN))
    assert is_elliptic(family_symbol("example1", Fraction(-9, 10)))
    assert not is_elliptic(parse(NOT_ELLIPTIC))
