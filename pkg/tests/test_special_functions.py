import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import eval_genlaguerre, j0

from app.core.quadrature import gauss_laguerre_rule
from app.core.special_functions import (
    bessel_j0,
    bessel_j0_integral,
    bessel_j0_series,
    laguerre_bessel_residual,
    laguerre_eval,
    laguerre_eval_many,
    laguerre_poly,
    laguerre_poly_recurrence,
)
from app.models.domain import LaguerreIndex

J0_FIRST_ZERO = 2.404825557695773


def test_low_order_laguerre_polynomials():
    assert laguerre_poly(LaguerreIndex(k=0)).to_strings() == ["1"]
    assert laguerre_poly(LaguerreIndex(k=1)).to_strings() == ["1", "-1"]
    assert laguerre_poly(LaguerreIndex(k=2)).to_strings() == ["1", "-2", "1/2"]
    # L¹_1(x) = 2 - x
    assert laguerre_poly(LaguerreIndex(k=1, beta=1)).to_strings() == ["2", "-1"]


@pytest.mark.parametrize("k", range(0, 13))
@pytest.mark.parametrize("beta", [0, 1, 3])
def test_binomial_sum_matches_exact_recurrence(k, beta):
    idx = LaguerreIndex(k=k, beta=beta)
    assert laguerre_poly(idx) == laguerre_poly_recurrence(idx)


def test_value_at_origin_is_binomial():
    for k in range(8):
        for beta in range(3):
            assert laguerre_poly(LaguerreIndex(k=k, beta=beta))(0) == Fraction(math.comb(k + beta, k))


@pytest.mark.parametrize(
    ("k", "beta", "x", "expected"),
    [(1, 1, 2.0, 0.0), (2, 0, 0.0, 1.0), (1, 0, 1.0, 0.0)],
)
def test_evaluation_examples(k, beta, x, expected):
    assert laguerre_eval(LaguerreIndex(k=k, beta=beta), x) == expected


@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 4.5, 12.0, 30.0, 100.0])
def test_evaluation_is_rounded_exact_value(x):
    for k in (0, 1, 4, 9, 12):
        for beta in (0, 1):
            idx = LaguerreIndex(k=k, beta=beta)
            assert laguerre_eval(idx, x) == float(laguerre_poly(idx)(Fraction(x)))
            assert laguerre_eval(idx, x) == pytest.approx(eval_genlaguerre(k, beta, x), rel=1e-9, abs=1e-9)


def test_vectorized_recurrence_matches_exact_values():
    x = np.linspace(0.0, 100.0, 41)
    for k in range(13):
        for beta in (0, 1):
            exact = [laguerre_eval(LaguerreIndex(k=k, beta=beta), v) for v in x]
            scale = np.maximum(1.0, np.abs(exact))
            assert np.all(np.abs(laguerre_eval_many(k, beta, x) - exact) <= 1e-10 * scale)


def test_invalid_indices_are_rejected():
    with pytest.raises(ValidationError):
        LaguerreIndex(k=-1)
    with pytest.raises(ValidationError):
        LaguerreIndex(k=2.0)
    with pytest.raises(ValidationError):
        LaguerreIndex(k=True)
    with pytest.raises(ValueError):
        laguerre_eval(LaguerreIndex(k=1), float("nan"))


def test_j0_at_origin_and_first_zero():
    assert bessel_j0(0.0) == 1.0
    assert abs(bessel_j0(J0_FIRST_ZERO)) < 1e-13


def test_j0_is_even_and_bounded():
    x = np.random.default_rng(7).uniform(0.01, 50.0, 500)
    values = bessel_j0(x)
    assert np.array_equal(values, bessel_j0(-x))
    assert np.all(np.abs(values) < 1.0)


def test_series_and_integral_forms_agree():
    x = np.linspace(0.0, 8.0, 41)
    np.testing.assert_allclose(bessel_j0_series(x), bessel_j0_integral(x), rtol=0, atol=1e-12)


def test_j0_matches_scipy_across_branch_point():
    x = np.concatenate([np.linspace(0.0, 7.9, 40), np.linspace(8.1, 50.0, 60)])
    np.testing.assert_allclose(bessel_j0(x), j0(x), rtol=0, atol=1e-12)


def test_j0_keeps_input_shape():
    grid = np.arange(6.0).reshape(2, 3)
    assert bessel_j0(grid).shape == (2, 3)
    assert isinstance(bessel_j0(3.0), float)


def test_j0_rejects_non_finite_arguments():
    with pytest.raises(ValueError):
        bessel_j0(np.array([1.0, np.inf]))


def test_laguerre_bessel_identity_on_lattice():
    worst = max(
        laguerre_bessel_residual(k, x)
        for k in range(11)
        for x in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)
    )
    assert worst <= 1e-8


def test_laguerre_bessel_refines_a_coarse_supplied_rule():
    # sixteen plain Laguerre nodes disagree with thirty-two; the next doubling settles
    assert laguerre_bessel_residual(10, 20.0, quad=gauss_laguerre_rule(16)) <= 1e-8


def test_laguerre_bessel_rejects_negative_arguments():
    with pytest.raises(ValueError):
        laguerre_bessel_residual(2, -1.0)
    with pytest.raises(ValueError):
        laguerre_bessel_residual(-1, 1.0)
