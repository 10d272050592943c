import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad

from app.core.berezin import berezin_quadrature, berezin_quadrature_many
from app.core.errors import NoRootsFoundError
from app.core.exact_polynomials import compute_Qn
from app.core.exotic import (
    berezin_exponential_closed_form,
    closed_form_residual,
    eigen_relation_residual,
    exotic_config,
    exponential_fixed_point_residual,
    find_exotic_roots,
    gaussian_moment_I,
    moment_polynomial,
    multiplier_polynomial_P,
    root_residual,
    s_coefficient,
    s_polynomial,
    verify_exotic_fixed_point,
)
from app.models.domain import ExponentialSymbol, RootCertificate
from app.models.polynomial import RationalPoly

EIGHT_PI = 8 * math.pi


def test_low_moments():
    a = 0.7 - 0.2j
    base = cmath.exp(a * a / 4)
    assert gaussian_moment_I(0, a) == pytest.approx(base)
    assert gaussian_moment_I(1, a) == pytest.approx(a / 2 * base)
    assert gaussian_moment_I(2, a) == pytest.approx((a * a / 4 + 0.5) * base)
    assert gaussian_moment_I(2, 0) == 0.5


@pytest.mark.parametrize("k", [0, 3, 6])
def test_moments_match_numerical_integral(k):
    a = 1.3

    def integrand(x):
        return x**k * math.exp(a * x - x * x) / math.sqrt(math.pi)

    expected = quad(integrand, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
    assert gaussian_moment_I(k, a).real == pytest.approx(expected, rel=1e-10)


def complex_quad(integrand):
    real = quad(lambda x: integrand(x).real, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    imag = quad(lambda x: integrand(x).imag, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13)[0]
    return complex(real, imag)


@pytest.mark.parametrize("a", [0.0, 1.0, 2.0, 1 + 1j])
def test_moment_recurrence_matches_integral(a):
    for k in range(9):
        expected = complex_quad(lambda x, k=k: x**k * cmath.exp(a * x - x * x) / math.sqrt(math.pi))
        assert gaussian_moment_I(k, a) == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_moment_polynomials():
    assert moment_polynomial(3) == RationalPoly.of(0, "3/4", 0, "1/8")
    assert moment_polynomial(4) == RationalPoly.of("3/4", 0, "3/4", 0, "1/16")
    for k in range(21):
        assert moment_polynomial(k).parity() == k % 2


def test_moment_polynomial_tracks_recurrence():
    a = 1.1 + 0.4j
    for k in range(10):
        assert moment_polynomial(k).evaluate(a) * cmath.exp(a * a / 4) == pytest.approx(gaussian_moment_I(k, a))


def test_s_terms():
    assert s_polynomial(1) == RationalPoly.of(1, 0, "1/4")
    assert s_polynomial(2) == RationalPoly.of(2, 0, 1, 0, "1/16")
    a = 0.9 + 0.3j
    for m in range(6):
        assert s_coefficient(m, a) == pytest.approx(s_polynomial(m).evaluate(a) * cmath.exp(a * a / 4))


def test_index_bounds():
    with pytest.raises(ValueError):
        gaussian_moment_I(41, 1.0)
    with pytest.raises(ValueError):
        s_polynomial(21)
    with pytest.raises(ValueError):
        multiplier_polynomial_P(11)


@pytest.mark.parametrize("n", range(1, 8))
def test_multiplier_polynomial_is_rescaled_symbol(n):
    assert multiplier_polynomial_P(n) == compute_Qn(n).q_poly.compose_linear(Fraction(-1, 4))


def test_second_order_multiplier():
    assert multiplier_polynomial_P(2) == RationalPoly.of(1, 0, "1/32")


def test_closed_form_matches_quadrature():
    a = 1.0
    z = 0.3 - 0.2j
    closed = berezin_exponential_closed_form(2, a, z)
    numeric = berezin_quadrature(exotic_config(2, a), ExponentialSymbol(a=a), z)
    assert closed == pytest.approx(numeric, rel=1e-8)
    # B_n f_a = P(a²) e^{a²/4} f_a
    assert closed / math.exp(a * z.real) == pytest.approx(multiplier_polynomial_P(2).evaluate(1.0) * math.exp(0.25))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("a", [0.5, 2.0, 1 + 1j, -1.5j])
def test_closed_form_matches_quadrature_on_unit_disk(n, a):
    points = [0j, 0.6 - 0.8j, -0.5j, 0.3 + 0.4j]
    numeric = berezin_quadrature_many(exotic_config(n, a), ExponentialSymbol(a=a), points)
    for z, value in zip(points, numeric):
        assert berezin_exponential_closed_form(n, a, z) == pytest.approx(value, rel=1e-7)


def test_first_order_roots_on_imaginary_axis():
    roots = [cert.root for cert in find_exotic_roots(1, 55.0)]
    assert len(roots) == 4
    np.testing.assert_allclose(
        roots, [-2 * EIGHT_PI * 1j, -EIGHT_PI * 1j, EIGHT_PI * 1j, 2 * EIGHT_PI * 1j], atol=1e-9
    )


def test_first_order_roots_are_certified():
    certificates = find_exotic_roots(1, 30.0)
    assert [c.root.imag for c in certificates] == pytest.approx([-EIGHT_PI, EIGHT_PI])
    for cert in certificates:
        assert cert.residual <= 1e-10
        assert cert.a == pytest.approx(cmath.sqrt(cert.root))


def test_max_roots_keeps_the_smallest():
    certificates = find_exotic_roots(1, 55.0, max_roots=2)
    assert [abs(c.root) for c in certificates] == pytest.approx([EIGHT_PI, EIGHT_PI])


def test_no_roots_inside_small_disk():
    with pytest.raises(NoRootsFoundError):
        find_exotic_roots(1, 5.0)
    with pytest.raises(ValueError):
        find_exotic_roots(7, 10.0)


def test_second_order_roots_within_forty():
    certificates = find_exotic_roots(2, 40.0)
    assert certificates
    for cert in certificates:
        assert abs(cert.root) <= 40.0
        assert root_residual(2, cert.root) <= 1e-10
    smallest = min(certificates, key=lambda c: abs(c.root))
    assert closed_form_residual(2, smallest.a) <= 1e-5


def test_certificate_rejects_non_roots():
    with pytest.raises(ValidationError):
        RootCertificate(n=1, root=1 + 1j, residual=0.0, newton_steps=0, seed=1 + 1j)
    with pytest.raises(ValidationError):
        RootCertificate(n=1, root=0j, residual=0.0, newton_steps=0, seed=0j)


@pytest.mark.slow
def test_first_order_fixed_point_verifies():
    cert = find_exotic_roots(1, 30.0)[-1]
    result = verify_exotic_fixed_point(1, cert)
    assert cert.a == pytest.approx(cmath.sqrt(EIGHT_PI * 1j))
    assert result.quadrature_residual is not None
    assert result.fixed_point_residual <= 1e-6
    assert result.closed_form_residual <= 1e-9
    assert result.laplacian_residual <= 1e-6
    assert not result.harmonic


def test_verification_guards():
    cert = find_exotic_roots(1, 30.0)[0]
    with pytest.raises(ValueError):
        verify_exotic_fixed_point(2, cert)
    with pytest.raises(ValueError):
        verify_exotic_fixed_point(1, cert, probes=[2.0])


def test_non_root_is_not_fixed():
    # a² = 1 is not a root, so f_1 is scaled by P(1) e^{1/4} = e^{1/4}
    assert exponential_fixed_point_residual(1, 1.0, cfg=exotic_config(1, 1.0)) == pytest.approx(
        math.exp(0.25) - 1, rel=1e-8
    )


@pytest.mark.parametrize("a", [1.0, 2.0, 1 + 1j])
def test_exponential_is_an_eigenfunction_of_the_laplacian(a):
    rng = np.random.default_rng(12)
    points = rng.uniform(-1.0, 1.0, 20) + 1j * rng.uniform(-1.0, 1.0, 20)
    assert eigen_relation_residual(a, points.tolist()) <= 1e-6
