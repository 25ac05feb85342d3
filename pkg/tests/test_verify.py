from fractions import Fraction

import pytest

from frel.analysis.geometry import face_weights
from frel.analysis.polynomial import family_symbol, parse
from frel.analysis.verify import (
    bump,
    energy,
    energy_form,
    remark_bounds_check,
    remark_factors,
    symbol_duality_check,
    vanishing_order_failures,
    verify_convex,
    verify_halfspace,
    weighted_mass,
)
from frel.errors import DimensionError, DomainError, TableMismatchError, TestFunctionError
from frel.models.bumps import TestFunction
from frel.models.domains import ConvexPolytope, HalfSpace
from frel.utils.grammar import parse_polynomial

UNIT_BOX = [(0, 1), (0, 1)]
UPPER_HALF = HalfSpace(normal=(0.0, 1.0))


def test_energy_of_one_dimensional_second_order_operator():
    symbol = parse("x1^2")
    u = bump([(0, 1)], 1)
    assert u.polynomial == parse_polynomial("x1 - x1^2")
    assert energy(symbol, u) == Fraction(1, 3)
    assert energy_form(symbol, u) == Fraction(1, 3)


@pytest.mark.parametrize("fixture_name", ["bilaplacian", "h0", "h2", "hhat3"])
def test_energy_agrees_with_dirichlet_form(fixture_name, request):
    symbol = request.getfixturevalue(fixture_name)
    u = bump([(0, 1), (Fraction(1, 2), 2)], symbol.m, extra=parse_polynomial("1 + x1*x2"))
    assert energy(symbol, u) == energy_form(symbol, u)
    assert energy(symbol, u) > 0


def test_bump_vanishes_to_requested_order():
    u = bump(UNIT_BOX, 2)
    assert vanishing_order_failures(u.polynomial, u.box, 2) == []
    assert vanishing_order_failures(u.polynomial, u.box, 3) != []
    assert u.label == "bump(m=2)"


def test_test_function_with_too_low_vanishing_order_is_rejected(h0):
    with pytest.raises(TestFunctionError):
        energy(h0, bump(UNIT_BOX, 1))
    shallow = TestFunction(polynomial=bump(UNIT_BOX, 1).polynomial, box=UNIT_BOX, m=2)
    with pytest.raises(TestFunctionError):
        energy(h0, shallow)


def test_test_function_dimension_must_match_symbol(h0):
    with pytest.raises(DimensionError):
        energy(parse("x1^2"), bump(UNIT_BOX, 1))
    with pytest.raises(DimensionError):
        bump(UNIT_BOX, 2, extra=parse_polynomial("x3"))


def test_empty_support_box_is_rejected():
    with pytest.raises(ValueError):
        bump([(0, 1), (1, 1)], 2)


def test_support_box_must_stay_in_the_domain(h0, table_for):
    with pytest.raises(DomainError):
        weighted_mass(h0, table_for(h0), UPPER_HALF, bump([(0, 1), (-1, 1)], 2))


@pytest.mark.parametrize("fixture_name", ["bilaplacian", "h0"])
def test_halfspace_quotient_exceeds_sharp_constant(fixture_name, request, table_for):
    symbol = request.getfixturevalue(fixture_name)
    report = verify_halfspace(symbol, table_for(symbol), UPPER_HALF, bump(UNIT_BOX, 2))
    assert report.passed
    assert report.bound == pytest.approx(9 / 16)
    assert report.ratio >= 9 / 16
    assert report.margin > 0
    assert report.mass_error < 1e-6 * report.weighted_mass
    assert report.sharp_ratio == pytest.approx(9 / 16, rel=1e-9)


def test_halfspace_quotient_is_scale_invariant(h2, table_for):
    table = table_for(h2)
    u = bump(UNIT_BOX, 2)
    base = verify_halfspace(h2, table, UPPER_HALF, u)
    scaled = verify_halfspace(h2, table, UPPER_HALF, u.scaled(3))
    assert scaled.energy == 9 * base.energy
    assert scaled.ratio == pytest.approx(base.ratio, rel=1e-9)


@pytest.mark.parametrize("beta", [0, 2, 5])
def test_convex_quotient_on_unit_square(beta, table_for):
    symbol = family_symbol("example1", beta)
    report = verify_convex(symbol, table_for(symbol), ConvexPolytope.unit_square(), bump(UNIT_BOX, 2))
    assert report.passed
    assert report.margin > 0
    assert report.bound_name == "A(m)*mu/M"
    assert report.bound > report.comparison_bound
    assert report.stronger == "theorem2"


def test_power_sum_on_unit_square_against_stored_moment_bounds(h0, table_for, h0_oracle):
    oracle_mu, oracle_big_m = h0_oracle
    report = verify_convex(h0, table_for(h0), ConvexPolytope.unit_square(), bump(UNIT_BOX, 2))
    assert report.bound == pytest.approx(9 / 16 * oracle_mu / oracle_big_m, rel=1e-6)
    assert report.passed
    assert report.ratio >= report.bound


@pytest.mark.parametrize("beta", [0, 5])
def test_convex_verdict_is_translation_invariant(beta, table_for):
    symbol = family_symbol("example1", beta)
    table = table_for(symbol)
    base = verify_convex(symbol, table, ConvexPolytope.unit_square(), bump(UNIT_BOX, 2))
    shifted = verify_convex(symbol, table, ConvexPolytope.box([2.0, -1.0], [3.0, 0.0]), bump([(2, 3), (-1, 0)], 2))
    assert shifted.energy == base.energy
    assert shifted.ratio == pytest.approx(base.ratio, rel=1e-5)
    assert shifted.passed == base.passed


@pytest.mark.parametrize(("family", "beta"), [("example1", 0), ("example1", 5), ("example2", 7)])
def test_finsler_mass_is_dominated_by_euclidean_mass(family, beta, table_for):
    symbol = family_symbol(family, beta)
    table = table_for(symbol)
    triangle = ConvexPolytope.from_vertices([[0, 0], [1, 0], [0, 1]])
    u = bump([("1/20", "9/20"), ("1/20", "9/20")], symbol.m)
    finsler = weighted_mass(symbol, table, triangle, u).value
    euclidean = weighted_mass(symbol, table, triangle, u, euclidean=True).value
    weights = face_weights(symbol, table, triangle)
    power = 2 * symbol.m
    assert finsler <= weights.max() ** power * euclidean * (1 + 1e-5)
    assert finsler >= weights.min() ** power * euclidean * (1 - 1e-5)


def test_euclidean_symbol_mass_matches_euclidean_distance(bilaplacian, table_for):
    triangle = ConvexPolytope.from_vertices([[0, 0], [1, 0], [0, 1]])
    u = bump([("1/20", "9/20"), ("1/20", "9/20")], 2)
    finsler = weighted_mass(bilaplacian, table_for(bilaplacian), triangle, u).value
    euclidean = weighted_mass(bilaplacian, table_for(bilaplacian), triangle, u, euclidean=True).value
    assert finsler == pytest.approx(euclidean, rel=1e-8)


def test_verify_rejects_stale_table(h0, h2, table_for):
    with pytest.raises(TableMismatchError):
        verify_halfspace(h2, table_for(h0), UPPER_HALF, bump(UNIT_BOX, 2))


@pytest.mark.parametrize("beta", [-0.9, -0.5, 0, 2, 10])
def test_duality_inequality_holds_on_random_pairs(beta):
    report = symbol_duality_check(family_symbol("example1", beta), samples=100_000, seed=17)
    assert report.passed
    assert report.worst_slack >= -1e-9
    assert report.samples == 100_000


def test_duality_check_is_reproducible(h2):
    first = symbol_duality_check(h2, samples=2000, seed=3)
    second = symbol_duality_check(h2, samples=2000, seed=3)
    assert first == second


def test_remark_factors():
    assert remark_factors("example1", 0) == (0.5, 2.0)
    assert remark_factors("example1", 3) == (0.25, 1.0)
    assert remark_factors("example2", 1) == (0.25, 2.0)
    with pytest.raises(ValueError):
        remark_factors("custom", 0)


@pytest.mark.parametrize(
    ("family", "beta"),
    [
        ("example1", -0.9),
        ("example1", -0.5),
        ("example1", 0),
        ("example1", 1),
        ("example1", 5),
        ("example2", -0.5),
        ("example2", 3),
        ("example2", 10),
    ],
)
def test_dual_norm_stays_within_remark_bounds(family, beta):
    report = remark_bounds_check(family, beta)
    assert report.passed, report


def test_remark_check_reads_table_values(h0, table_for):
    table = table_for(h0)
    report = remark_bounds_check("example1", 0, table)
    assert report.points == table.points
    assert report.min_value == pytest.approx(1.0, rel=1e-9)
    assert report.max_value == pytest.approx(2.0, rel=1e-9)
