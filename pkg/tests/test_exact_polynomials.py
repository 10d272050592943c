import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exact_polynomials import (
    BerezinSymbol,
    H_multi_eval,
    H_n_eval,
    H_SERIES_RADIUS,
    b_hat_eval,
    b_hat_multi,
    bound_excess,
    coefficients_from_json,
    coefficients_to_json,
    compute_Qn,
    h_series_coefficients,
    laplacian_gaussian_check,
    u_n_bessel_form,
    u_n_eval,
    u_n_many,
)
from app.models.polynomial import RationalPoly


@pytest.mark.parametrize("n", range(1, 11))
def test_constant_term_is_exactly_one(n):
    sym = compute_Qn(n)
    assert sym.q_poly.coefficient(0) == Fraction(1)
    assert sym.q_poly.degree == 2 * (n - 1)


def test_low_order_symbols():
    assert compute_Qn(1).q_poly == RationalPoly.of(1)
    assert compute_Qn(2).q_poly == RationalPoly.of(1, 0, "1/2")
    assert compute_Qn(3).q_poly == RationalPoly.of(1, 0, 1, "-1/3", "1/12")


def test_order_outside_range_is_rejected():
    with pytest.raises(ValueError):
        compute_Qn(0)
    with pytest.raises(ValueError):
        compute_Qn(13)


def test_symbol_shape_is_validated():
    with pytest.raises(ValidationError):
        BerezinSymbol(n=2, q_poly=RationalPoly.of(1, 1))
    with pytest.raises(ValidationError):
        BerezinSymbol(n=2, q_poly=RationalPoly.of(2, 0, 1))


def test_u_n_examples():
    assert u_n_eval(compute_Qn(1), 0.0) == 1.0
    assert u_n_eval(compute_Qn(2), 3.0) == pytest.approx((1 + 9 / 2) * math.exp(-3), rel=1e-15)
    with pytest.raises(ValueError):
        u_n_eval(compute_Qn(2), -1.0)
    with pytest.raises(ValueError):
        u_n_eval(compute_Qn(2), float("nan"))


@pytest.mark.parametrize("n", range(1, 7))
def test_u_n_stays_strictly_inside_unit_interval(n):
    samples = np.logspace(-3, 2, 200)
    assert bound_excess(compute_Qn(n), samples) == 0.0
    assert np.all(np.abs(u_n_many(compute_Qn(n), samples)) < 1.0 - 1e-12)


@pytest.mark.parametrize("n", range(1, 5))
@pytest.mark.parametrize("x", [0.0, 0.5, 2.0, 5.0, 20.0])
def test_polynomial_and_bessel_forms_agree(n, x):
    sym = compute_Qn(n)
    assert abs(u_n_eval(sym, x) - u_n_bessel_form(sym, x)) <= 1e-8


def test_b_hat_is_radial_and_matches_u_n():
    sym = compute_Qn(3)
    for r in (0.0, 0.7, 2.0, 4.0):
        expected = u_n_eval(sym, r * r / 4)
        for angle in (0.0, 1.0, 2.5):
            assert b_hat_eval(sym, r * np.exp(1j * angle)) == pytest.approx(expected, rel=1e-14, abs=1e-300)


def test_multi_symbol_factorizes_over_coordinates():
    sym = compute_Qn(2)
    assert b_hat_multi(sym, (2.0, 0.0)) == pytest.approx(1.5 / math.e, rel=1e-15)
    z = (1 + 1j, -0.5j)
    assert b_hat_multi(sym, z) == pytest.approx(b_hat_eval(sym, z[0]) * b_hat_eval(sym, z[1]), rel=1e-14)
    assert b_hat_multi(sym, 2.0) == b_hat_eval(sym, 2.0)
    assert b_hat_multi(sym, 1 + 2j) == float(sym.q_poly(Fraction(5, 4))) * math.exp(-1.25)


def test_h_examples():
    sym = compute_Qn(1)
    assert H_n_eval(sym, 0j) == -0.25
    assert H_n_eval(sym, 2.0) == pytest.approx((1 - math.exp(-1)) / -4, rel=1e-14)
    assert H_multi_eval(compute_Qn(2), (0j, 0j)) == -0.25


@pytest.mark.parametrize("n", range(1, 5))
def test_h_is_continuous_across_series_switch(n):
    sym = compute_Qn(n)
    inside = H_n_eval(sym, H_SERIES_RADIUS * (1 - 1e-9))
    outside = H_n_eval(sym, H_SERIES_RADIUS * (1 + 1e-9))
    assert abs(inside - outside) <= 1e-12


@pytest.mark.parametrize("n", range(1, 5))
def test_h_never_vanishes(n):
    rng = np.random.default_rng(n)
    radii = 20.0 * np.sqrt(rng.uniform(0.0, 1.0, 1000))
    angles = rng.uniform(0.0, 2 * math.pi, 1000)
    values = np.array([H_n_eval(compute_Qn(n), r * np.exp(1j * a)) for r, a in zip(radii, angles)])
    assert np.all(values < 0)


def test_h_series_starts_with_taylor_of_u_n():
    # u_2(t) = (1 + t²/2) e^{-t} = 1 - t + t² - 2t³/3 + ...
    assert h_series_coefficients(compute_Qn(2), 4) == [1, -1, 1, Fraction(-2, 3)]


def test_multi_h_agrees_with_single_variable_on_axis():
    sym = compute_Qn(3)
    for z in (0.3, 1.0 + 0.5j, 3.0):
        assert H_multi_eval(sym, (z, 0j)) == pytest.approx(H_n_eval(sym, z), rel=1e-12)


def test_laplacian_of_gaussian_at_origin():
    # Δ e^{-|z|²/4} = -1 at the origin
    assert laplacian_gaussian_check(0, [0j, 1 + 1j]) == 0.0
    assert laplacian_gaussian_check(1, [0j]) <= 1e-6


def test_iterated_laplacian_of_gaussian_on_grid():
    axis = np.linspace(-2.8, 2.8, 5)
    points = [complex(x, y) for x in axis for y in axis]
    assert laplacian_gaussian_check(1, points) <= 1e-6
    assert laplacian_gaussian_check(2, points) <= 1e-5


def test_laplacian_check_rejects_out_of_range_arguments():
    with pytest.raises(ValueError):
        laplacian_gaussian_check(7, [0j])
    with pytest.raises(ValueError):
        laplacian_gaussian_check(1, [7.0])


def test_coefficients_survive_json_strings():
    poly = compute_Qn(4).q_poly
    assert coefficients_from_json(coefficients_to_json(poly)) == poly
