import logging
import math
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss

from app.core.quadrature import QuadratureRule, gauss_laguerre_rule, integrate_converged
from app.models.domain import LaguerreIndex
from app.models.polynomial import RationalPoly

logger = logging.getLogger("berezin_verifier.special_functions")

SERIES_CUTOFF = 8.0
SERIES_TERMS = 60
PANEL_ORDER = 16
PANEL_TOLERANCE = 1e-14
MAX_PANELS = 4096
DEFAULT_BESSEL_NODES = 128


@lru_cache(maxsize=256)
def laguerre_poly(idx: LaguerreIndex) -> RationalPoly:
    """L^β_k as an exact rational polynomial, from the explicit binomial sum."""
    k, beta = idx.k, idx.beta
    return RationalPoly(
        coeffs=[
            Fraction(math.comb(k + beta, k - j) * (-1) ** j, math.factorial(j))
            for j in range(k + 1)
        ]
    )


def laguerre_poly_recurrence(idx: LaguerreIndex) -> RationalPoly:
    """Same polynomial built from the three-term recurrence in exact arithmetic."""
    x = RationalPoly.of(0, 1)
    beta = idx.beta
    previous = RationalPoly.of(1)
    if idx.k == 0:
        return previous
    current = RationalPoly.of(1 + beta) - x
    for j in range(1, idx.k):
        following = (
            (RationalPoly.of(2 * j + 1 + beta) - x) * current - (j + beta) * previous
        ) / (j + 1)
        previous, current = current, following
    return current


def laguerre_eval(idx: LaguerreIndex, x: float) -> float:
    """Correctly rounded L^β_k(x): exact evaluation at the binary value of x, rounded once."""
    if not math.isfinite(x):
        raise ValueError(f"Cannot evaluate a Laguerre polynomial at {x!r}")
    return float(laguerre_poly(idx)(Fraction(x)))


def laguerre_eval_many(k: int, beta: int, x: Any) -> np.ndarray:
    """Vectorized floating L^β_k(x) by the forward recurrence."""
    if k < 0 or beta < 0:
        raise ValueError("Laguerre indices must be nonnegative.")
    x = np.asarray(x, dtype=float)
    previous = np.ones_like(x)
    if k == 0:
        return previous
    current = 1.0 + beta - x
    for j in range(1, k):
        previous, current = current, ((2 * j + 1 + beta - x) * current - (j + beta) * previous) / (j + 1)
    return current


def _as_float_array(x: Any) -> tuple[np.ndarray, bool]:
    array = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(array)):
        raise ValueError("Bessel J0 needs finite arguments.")
    return np.abs(array), array.ndim == 0


def bessel_j0_series(x: Any) -> Any:
    """Power series Σ (-1)^m (x/2)^{2m} / (m!)^2, summed to a fixed number of terms."""
    ax, scalar = _as_float_array(x)
    q = -((ax / 2.0) ** 2)
    term = np.ones_like(ax)
    total = np.ones_like(ax)
    for m in range(1, SERIES_TERMS):
        term = term * q / (m * m)
        total = total + term
    return float(total) if scalar else total


@lru_cache(maxsize=1)
def _legendre_panel() -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(PANEL_ORDER)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel_integral(ax: np.ndarray, panels: int) -> np.ndarray:
    nodes, weights = _legendre_panel()
    half = math.pi / (2 * panels)
    mids = (np.arange(panels) + 0.5) * (math.pi / panels)
    theta = (mids[:, None] + half * nodes[None, :]).ravel()
    w = np.tile(weights, panels) * half
    return np.cos(ax[..., None] * np.cos(theta)) @ w / math.pi


def bessel_j0_integral(x: Any) -> Any:
    """(1/π)∫₀^π cos(x cos θ) dθ by composite Gauss–Legendre panels, doubled to convergence."""
    ax, scalar = _as_float_array(x)
    panels = 4
    estimate = _panel_integral(ax, panels)
    while panels < MAX_PANELS:
        panels *= 2
        refined = _panel_integral(ax, panels)
        change = float(np.max(np.abs(refined - estimate), initial=0.0))
        estimate = refined
        if change <= PANEL_TOLERANCE:
            break
    else:
        logger.warning("J0 panel rule stopped at %d panels without settling", panels)
    logger.debug("J0 integral form used %d panels", panels)
    return float(estimate) if scalar else estimate


def bessel_j0(x: Any) -> Any:
    """J0 from the series for |x| <= 8 and from the integral form beyond."""
    ax, scalar = _as_float_array(x)
    flat = np.atleast_1d(ax)
    result = np.empty_like(flat)
    small = flat <= SERIES_CUTOFF
    if np.any(small):
        result[small] = bessel_j0_series(flat[small])
    if np.any(~small):
        result[~small] = bessel_j0_integral(flat[~small])
    return float(result[0]) if scalar else result.reshape(ax.shape)


def laguerre_bessel_residual(
    k: int,
    x: float,
    quad: QuadratureRule | None = None,
    tolerance: float = 1e-12,
) -> float:
    """|k! L⁰_k(x) e^{-x} - ∫₀^∞ e^{-t} t^k J0(2√(xt)) dt|.

    The integral uses generalized Gauss–Laguerre nodes for the weight t^α e^{-t}
    (α = k unless a rule is supplied) and must settle under node doubling to
    ``tolerance`` times k!, the bound on the integral's size.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if x < 0:
        raise ValueError("x must be nonnegative")
    rule = quad or gauss_laguerre_rule(DEFAULT_BESSEL_NODES, alpha=k)
    if rule.alpha > k:
        raise ValueError(f"Rule weight t^{rule.alpha:g} exceeds the integrand's t^{k}")
    power = k - int(rule.alpha)

    def integrand(t: np.ndarray) -> np.ndarray:
        return t**power * bessel_j0(2.0 * np.sqrt(x * t))

    integral = integrate_converged(integrand, rule, tolerance, scale=math.factorial(k))
    exact = math.factorial(k) * laguerre_eval(LaguerreIndex(k=k), x) * math.exp(-x)
    residual = abs(exact - float(np.real(integral)))
    logger.debug("Laguerre–Bessel residual k=%d x=%g: %.3e", k, x, residual)
    return residual
