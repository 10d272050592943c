import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.finite_differences import richardson_laplacian
from app.core.quadrature import QuadratureRule, gauss_laguerre_rule, integrate_converged
from app.core.special_functions import bessel_j0, laguerre_eval_many, laguerre_poly
from app.models.domain import LaguerreIndex, PointLike, as_point
from app.models.polynomial import RationalPoly

logger = logging.getLogger("berezin_verifier.exact_polynomials")

MAX_ORDER = 12
H_SERIES_RADIUS = 1e-2
H_SERIES_TERMS = 10
DEFAULT_U_NODES = 128


class BerezinSymbol(BaseModel):
    """Q_n together with its order; b̂_n(z) = Q_n(|z|²/4) e^{-|z|²/4}."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    q_poly: RationalPoly

    @model_validator(mode="after")
    def validate_shape(self) -> "BerezinSymbol":
        if self.q_poly.degree != 2 * (self.n - 1):
            raise ValueError(
                f"Q_{self.n} must have degree {2 * (self.n - 1)}, got {self.q_poly.degree}."
            )
        if self.q_poly.coefficient(0) != 1:
            raise ValueError(f"Q_{self.n}(0) must be 1, got {self.q_poly.coefficient(0)}.")
        return self


@lru_cache(maxsize=MAX_ORDER)
def compute_Qn(n: int) -> BerezinSymbol:
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"n must lie in 1..{MAX_ORDER}, got {n}")
    total = RationalPoly()
    for k in range(n):
        for l in range(n):
            weight = math.comb(n, k + 1) * math.comb(n, l + 1) * math.comb(k + l, k) * (-1) ** (k + l)
            total = total + weight * laguerre_poly(LaguerreIndex(k=k + l))
    return BerezinSymbol(n=n, q_poly=total / n)


def u_n_eval(sym: BerezinSymbol, x: float) -> float:
    """Q_n(x) e^{-x}, with Q_n evaluated exactly at the binary value of x."""
    if not x >= 0:
        raise ValueError(f"u_n is defined on x >= 0, got {x!r}")
    return float(sym.q_poly(Fraction(x))) * math.exp(-x)


def u_n_many(sym: BerezinSymbol, x: Any) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return sym.q_poly.evaluate(x) * np.exp(-x)


def u_n_bessel_form(
    sym: BerezinSymbol,
    x: float,
    quad: QuadratureRule | None = None,
    tolerance: float = 1e-12,
) -> float:
    """(1/n) ∫₀^∞ e^{-t} L¹_{n-1}(t)² J0(2√(xt)) dt by Gauss–Laguerre quadrature."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    rule = quad or gauss_laguerre_rule(DEFAULT_U_NODES)
    n = sym.n

    def integrand(t: np.ndarray) -> np.ndarray:
        return laguerre_eval_many(n - 1, 1, t) ** 2 / n * bessel_j0(2.0 * np.sqrt(x * t))

    return float(np.real(integrate_converged(integrand, rule, tolerance)))


def b_hat_eval(sym: BerezinSymbol, z: complex) -> float:
    return u_n_eval(sym, (z.real**2 + z.imag**2) / 4.0)


def b_hat_multi(sym: BerezinSymbol, z: PointLike) -> float:
    """e^{-|z|²/4} ∏_j Q_n(|z_j|²/4)."""
    point = as_point(z)
    product = 1.0
    for c in point.coordinates:
        product *= float(sym.q_poly(Fraction((c.real**2 + c.imag**2) / 4.0)))
    return product * math.exp(-point.norm_squared / 4.0)


def gaussian(points: Any) -> np.ndarray:
    return np.exp(-np.abs(points) ** 2 / 4.0)


def laplacian_gaussian_check(k: int, sample_points: list[complex]) -> float:
    """max |Δ^k_h e^{-|z|²/4} - (-1)^k k! L⁰_k(|z|²/4) e^{-|z|²/4}| over the samples."""
    if not 0 <= k <= 6:
        raise ValueError(f"k must lie in 0..6, got {k}")
    points = np.asarray(sample_points, dtype=complex)
    if np.any(np.abs(points) > 6):
        raise ValueError("Sample points must satisfy |z| <= 6.")
    numeric = richardson_laplacian(gaussian, points, k)
    t = np.abs(points) ** 2 / 4.0
    expected = (-1) ** k * math.factorial(k) * laguerre_eval_many(k, 0, t) * gaussian(points)
    residual = float(np.max(np.abs(numeric - expected)))
    logger.debug("Laplacian-of-Gaussian check k=%d: %.3e", k, residual)
    return residual


def h_series_coefficients(sym: BerezinSymbol, terms: int = H_SERIES_TERMS) -> list[Fraction]:
    """Exact Taylor coefficients c_0..c_{terms-1} of u_n(t) = Q_n(t) e^{-t}."""
    return [
        sum(
            (sym.q_poly.coefficient(j) * Fraction((-1) ** (m - j), math.factorial(m - j)) for j in range(m + 1)),
            Fraction(0),
        )
        for m in range(terms)
    ]


@lru_cache(maxsize=MAX_ORDER)
def _h_series(sym: BerezinSymbol) -> tuple[float, ...]:
    # H_n(z) = (u_n(t) - 1) / (4t) with t = |z|²/4
    return tuple(float(c / 4) for c in h_series_coefficients(sym)[1:])


def _one_minus_b_hat(sym: BerezinSymbol, t_parts: list[float]) -> float:
    """1 - e^{-T} ∏ Q_n(t_j) without cancellation, T = Σ t_j."""
    shifted = sym.q_poly.without_constant()
    excess = 0.0
    for t in t_parts:
        a = shifted.evaluate(t)
        excess = excess + a + excess * a
    total = sum(t_parts)
    return -math.expm1(-total) - math.exp(-total) * excess


def H_n_eval(sym: BerezinSymbol, z: complex) -> float:
    """(1 - b̂_n(z)) / (-|z|²), continued through the origin by its power series."""
    radius = abs(z)
    t = radius**2 / 4.0
    if radius <= H_SERIES_RADIUS:
        value = 0.0
        for c in reversed(_h_series(sym)):
            value = value * t + c
        return value
    return -_one_minus_b_hat(sym, [t]) / radius**2


def H_multi_eval(sym: BerezinSymbol, z: PointLike) -> float:
    """H_{d,n}(z) = (1 - b̂_{d,n}(z)) / (-|z|²); at the origin its limit (Q_n'(0) - 1)/4."""
    point = as_point(z)
    norm_squared = point.norm_squared
    if norm_squared == 0:
        return float((sym.q_poly.coefficient(1) - 1) / 4)
    parts = [(c.real**2 + c.imag**2) / 4.0 for c in point.coordinates]
    return -_one_minus_b_hat(sym, parts) / norm_squared


def coefficients_to_json(poly: RationalPoly) -> list[str]:
    return poly.to_strings()


def coefficients_from_json(values: list[str]) -> RationalPoly:
    return RationalPoly.from_strings(values)


def bound_excess(sym: BerezinSymbol, samples: Any, margin: float = 1e-12) -> float:
    """How far max |u_n| over the samples exceeds 1 - margin (0 when the bound holds)."""
    peak = max(abs(u_n_eval(sym, float(x))) for x in np.asarray(samples, dtype=float))
    return max(0.0, peak - (1.0 - margin))
