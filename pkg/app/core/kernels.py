import cmath
import logging
import math
import sys
from typing import Any

import numpy as np

from app.core.quadrature import (
    QuadratureRule,
    gauss_laguerre_rule,
    integrate_converged,
    polar_rule,
)
from app.core.special_functions import laguerre_eval, laguerre_eval_many
from app.models.domain import BerezinConfig, FockOrder, LaguerreIndex, PointLike, as_point

logger = logging.getLogger("berezin_verifier.kernels")

# natural log of the largest double
LOG_OVERFLOW = math.log(sys.float_info.max)


def _require_plane(order: FockOrder) -> None:
    if order.d != 1:
        raise ValueError(f"Expected a one-dimensional order, got d={order.d}")


def _coordinates(order: FockOrder, z: PointLike, w: PointLike) -> tuple[tuple[complex, ...], tuple[complex, ...]]:
    zc, wc = as_point(z).coordinates, as_point(w).coordinates
    if len(zc) != order.d or len(wc) != order.d:
        raise ValueError(f"Points must have {order.d} coordinates.")
    return zc, wc


def _z_wbar(z: complex, w: complex) -> complex:
    # real and imaginary parts written out so that swapping z and w conjugates exactly
    return complex(
        z.real * w.real + z.imag * w.imag,
        z.imag * w.real - z.real * w.imag,
    )


def _distance_squared(z: complex, w: complex) -> float:
    return (z.real - w.real) ** 2 + (z.imag - w.imag) ** 2


def kernel_log_K(order: FockOrder, z: PointLike, w: PointLike) -> complex:
    """log K_{d,n}(z, w) on the principal branch; -inf real part where a Laguerre factor vanishes."""
    zc, wc = _coordinates(order, z, w)
    index = LaguerreIndex(k=order.n - 1, beta=1)
    total = 0j
    for a, b in zip(zc, wc):
        factor = laguerre_eval(index, _distance_squared(a, b))
        if factor == 0:
            return complex(-math.inf, 0.0)
        total += cmath.log(factor) + _z_wbar(a, b)
    return total


def kernel_K(order: FockOrder, z: PointLike, w: PointLike) -> complex:
    """L¹_{n-1}(|z-w|²) e^{z w̄}; inf, with a WARNING, once the modulus passes the largest double."""
    _require_plane(order)
    return kernel_K_multi(order, z, w)


def _infinite_along(direction: complex) -> complex:
    """Infinity with the signs of ``direction``; zero components stay zero."""
    return complex(
        math.copysign(math.inf, direction.real) if direction.real else 0.0,
        math.copysign(math.inf, direction.imag) if direction.imag else 0.0,
    )


def kernel_K_multi(order: FockOrder, z: PointLike, w: PointLike) -> complex:
    """K_{d,n}(z, w) = ∏_j L¹_{n-1}(|z_j - w_j|²) e^{z_j w̄_j}.

    The real exponents are summed apart from the Laguerre and phase factors and
    recombined through the logarithm when e^{Σ Re z_j w̄_j} alone would overflow.
    """
    zc, wc = _coordinates(order, z, w)
    index = LaguerreIndex(k=order.n - 1, beta=1)
    value = 1 + 0j
    scale = 0.0
    for a, b in zip(zc, wc):
        exponent = _z_wbar(a, b)
        scale += exponent.real
        value *= laguerre_eval(index, _distance_squared(a, b)) * complex(
            math.cos(exponent.imag), math.sin(exponent.imag)
        )
    if value == 0:
        return 0j
    log_modulus = scale + math.log(abs(value))
    if log_modulus > LOG_OVERFLOW:
        logger.warning("Kernel modulus e^%.1f overflows double precision", log_modulus)
        return _infinite_along(value)
    if scale <= LOG_OVERFLOW:
        return value * math.exp(scale)
    return value / abs(value) * math.exp(log_modulus)


def normalized_kernel(order: FockOrder, z: PointLike, w: PointLike) -> complex:
    """k^n_z(w) = K_n(w, z) / √K_n(z, z), assembled in log form."""
    _require_plane(order)
    zc, wc = _coordinates(order, z, w)
    a, b = zc[0], wc[0]
    factor = laguerre_eval(LaguerreIndex(k=order.n - 1, beta=1), _distance_squared(b, a))
    exponent = _z_wbar(b, a) - (a.real**2 + a.imag**2) / 2.0
    return factor / math.sqrt(order.n) * cmath.exp(exponent)


def b_density_single(n: int, t: float) -> float:
    """b_n at a point with |z|² = t."""
    factor = laguerre_eval(LaguerreIndex(k=n - 1, beta=1), t)
    return math.exp(-t) * factor * factor / (n * math.pi)


def b_density(order: FockOrder, z: PointLike) -> float:
    """b_{d,n}(z) = ∏_j b_n(z_j)."""
    point = as_point(z)
    if point.d != order.d:
        raise ValueError(f"Point has {point.d} coordinates, order expects {order.d}.")
    value = 1.0
    for c in point.coordinates:
        value *= b_density_single(order.n, c.real**2 + c.imag**2)
    return value


def b_density_many(n: int, w: Any) -> np.ndarray:
    t = np.abs(np.asarray(w)) ** 2
    return np.exp(-t) * laguerre_eval_many(n - 1, 1, t) ** 2 / (n * math.pi)


def normalization_residual(
    order: FockOrder,
    quad: QuadratureRule | None = None,
    tolerance: float = 1e-12,
) -> float:
    """|∫ b_{d,n} dλ_d - 1| by radial Gauss–Laguerre quadrature.

    Over ℂ^d the tensor rule of a product integrand is the d-th power of the
    one-dimensional sum (1/n) Σ w_i L¹_{n-1}(t_i)².
    """
    rule = quad or gauss_laguerre_rule(64)
    n = order.n

    def radial(t: np.ndarray) -> np.ndarray:
        return laguerre_eval_many(n - 1, 1, t) ** 2 / n

    one_dimensional = float(np.real(integrate_converged(radial, rule, tolerance)))
    return abs(one_dimensional**order.d - 1.0)


def unit_vector_residual(
    order: FockOrder,
    z: PointLike,
    quad: QuadratureRule | None = None,
    tolerance: float = 1e-10,
) -> float:
    """|∫ |k^n_z|² dμ - 1| with a polar rule centred at the origin, not at z."""
    _require_plane(order)
    centre = as_point(z).coordinates[0]
    rule = quad or polar_rule(64, 64)
    n = order.n

    def density(w: np.ndarray) -> np.ndarray:
        factor = laguerre_eval_many(n - 1, 1, np.abs(w - centre) ** 2)
        exponent = 2.0 * np.real(w * np.conj(centre)) - abs(centre) ** 2
        return factor**2 / n * np.exp(exponent)

    return abs(integrate_converged(density, rule, tolerance) - 1.0)


def nu_rule(cfg: BerezinConfig) -> QuadratureRule:
    """Polar rule for the probability measure b_n dλ on ℂ.

    Gaussian weights are multiplied by L¹_{n-1}(t)²/n, nodes beyond the
    truncation radius are dropped and the rest renormalized to sum to one.
    """
    base = polar_rule(cfg.radial_nodes, cfg.angular_nodes)
    n = cfg.order.n
    t = np.abs(base.nodes) ** 2
    weights = base.weights * laguerre_eval_many(n - 1, 1, t) ** 2 / n
    keep = (t <= cfg.truncation_radius**2) & (weights > 0)
    weights = weights[keep]
    return base.with_weights(base.nodes[keep], weights / weights.sum())
