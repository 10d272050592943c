import logging
import math
from collections.abc import Callable, Sequence
from typing import Any, Literal

import numpy as np
from scipy.signal import fftconvolve

from app.core.errors import DecayPreconditionError, GridTooSmallError, InsufficientQuadratureError
from app.core.exact_polynomials import H_multi_eval, compute_Qn, u_n_many
from app.core.kernels import b_density_many, nu_rule
from app.core.quadrature import QuadratureRule
from app.models.domain import (
    BerezinConfig,
    BerezinMethod,
    FockOrder,
    PointLike,
    SmoothnessReport,
    as_point,
)
from app.models.grid import GridFunction

logger = logging.getLogger("berezin_verifier.berezin")

DECAY_RATIO = 1e-8
POINT_CHUNK = 256
SMOOTHNESS_STEPS = (0.2, 0.1, 0.05, 0.025)

Form = Literal["translation", "reflection"]
PointwiseFunction = Callable[..., Any]


def _probe_array(cfg: BerezinConfig, points: Sequence[PointLike]) -> np.ndarray:
    """Probes as an array of shape (P, d)."""
    coords = [as_point(p).coordinates for p in points]
    for c in coords:
        if len(c) != cfg.order.d:
            raise ValueError(f"Probe {c} does not have {cfg.order.d} coordinates.")
    return np.array(coords, dtype=complex).reshape(len(coords), cfg.order.d)


def evaluate_at(f: PointwiseFunction, probes: np.ndarray) -> np.ndarray:
    """f at probes of shape (P, d); f takes one array per coordinate."""
    return np.asarray(f(*(probes[:, j] for j in range(probes.shape[1]))), dtype=complex) * np.ones(
        probes.shape[0]
    )


def _rule_sum(
    f: PointwiseFunction,
    probes: np.ndarray,
    rule: QuadratureRule,
    form: Form,
) -> np.ndarray:
    d = probes.shape[1]
    sign = 1.0 if form == "translation" else -1.0
    if d == 1:
        out = np.empty(probes.shape[0], dtype=complex)
        for start in range(0, probes.shape[0], POINT_CHUNK):
            block = probes[start : start + POINT_CHUNK, 0]
            values = np.asarray(f(block[:, None] + sign * rule.nodes[None, :]), dtype=complex)
            out[start : start + POINT_CHUNK] = (values * rule.weights).sum(axis=-1)
        return out
    # tensor rule over ℂ^d, one axis per coordinate
    grids = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    weights = np.ones(())
    for _ in range(d):
        weights = np.multiply.outer(weights, rule.weights)
    out = np.empty(probes.shape[0], dtype=complex)
    for p, point in enumerate(probes):
        values = np.asarray(f(*(point[j] + sign * grids[j] for j in range(d))), dtype=complex)
        out[p] = np.sum(values * weights)
    return out


def berezin_quadrature_many(
    cfg: BerezinConfig,
    f: PointwiseFunction,
    points: Sequence[PointLike],
    form: Form = "translation",
    check_convergence: bool = True,
) -> np.ndarray:
    """B_{d,n} f at many points as ∫ f(z ± w) b_{d,n}(w) dλ(w).

    The refined estimate (radial and angular nodes doubled) is returned; when
    ``check_convergence`` is set it must agree with the base estimate to
    ``cfg.tolerance`` relative to max(1, |value|).
    """
    probes = _probe_array(cfg, points)
    if not check_convergence:
        return _rule_sum(f, probes, nu_rule(cfg), form)
    coarse = _rule_sum(f, probes, nu_rule(cfg), form)
    fine = _rule_sum(f, probes, nu_rule(cfg.refined()), form)
    change = np.abs(fine - coarse)
    allowed = cfg.tolerance * np.maximum(1.0, np.abs(fine))
    worst = int(np.argmax(change - allowed))
    logger.debug(
        "Node doubling %dx%d -> %dx%d: max change %.3e",
        cfg.radial_nodes, cfg.angular_nodes, 2 * cfg.radial_nodes, 2 * cfg.angular_nodes,
        float(change.max(initial=0.0)),
    )
    if np.any(change > allowed):
        raise InsufficientQuadratureError(
            f"Berezin quadrature at {probes[worst].tolist()} changed by {change[worst]:.3e} "
            f"under node doubling (allowed {allowed[worst]:.3e}).",
            estimates=(complex(coarse[worst]), complex(fine[worst])),
        )
    return fine


def berezin_quadrature(
    cfg: BerezinConfig,
    f: PointwiseFunction,
    z: PointLike,
    form: Form = "translation",
) -> complex:
    """B_{d,n} f(z); ``form="reflection"`` integrates f(z - w) instead of f(z + w)."""
    return complex(berezin_quadrature_many(cfg, f, [z], form=form)[0])


def fourier_transform_quadrature(order: FockOrder, z: complex, cfg: BerezinConfig | None = None) -> complex:
    """∫ b_n(w) e^{-i Re(z w̄)} dλ(w) by the b_n-weighted polar rule."""
    cfg = cfg or BerezinConfig.for_order(order.n)
    return berezin_quadrature(cfg, lambda w: np.exp(-1j * np.real(z * np.conj(w))), 0j)


def fixed_point_residual(
    cfg: BerezinConfig,
    f: PointwiseFunction,
    probes: Sequence[PointLike],
) -> float:
    """max |B_n f(z) - f(z)| over the probes."""
    array = _probe_array(cfg, probes)
    transformed = berezin_quadrature_many(cfg, f, probes)
    residual = float(np.max(np.abs(transformed - evaluate_at(f, array))))
    logger.debug("Fixed-point residual over %d probes: %.3e", len(array), residual)
    return residual


def pluriharmonic_invariance_residual(
    cfg: BerezinConfig,
    f: PointwiseFunction,
    probes: Sequence[PointLike],
) -> float:
    if cfg.order.d != 2:
        raise ValueError(f"Pluriharmonic checks run in dimension 2, got d={cfg.order.d}")
    return fixed_point_residual(cfg, f, probes)


def _require_plane_grid(cfg: BerezinConfig) -> None:
    if cfg.order.d != 1:
        raise ValueError("Grid methods are restricted to d = 1; use tensorized quadrature for d >= 2.")


def convolution_kernel(cfg: BerezinConfig, spacing: float) -> np.ndarray:
    """b_n sampled at offsets (i h, j h), |i|, |j| <= ceil(T/h), times h²."""
    reach = math.ceil(cfg.truncation_radius / spacing)
    offsets = np.arange(-reach, reach + 1) * spacing
    w = offsets[None, :] + 1j * offsets[:, None]
    return b_density_many(cfg.order.n, w) * spacing**2


def berezin_convolve_grid(cfg: BerezinConfig, f: GridFunction) -> GridFunction:
    """f * b_n on the grid, zero-padded; only the band |x|, |y| <= R - T is reliable."""
    _require_plane_grid(cfg)
    if f.half_width <= cfg.truncation_radius:
        raise GridTooSmallError(
            f"Grid half-width {f.half_width:g} does not exceed the truncation radius "
            f"{cfg.truncation_radius:g}; no interior band survives."
        )
    kernel = convolution_kernel(cfg, f.spacing)
    if kernel.shape[0] > f.resolution:
        raise GridTooSmallError(
            f"Kernel footprint {kernel.shape[0]} exceeds the grid resolution {f.resolution}."
        )
    logger.debug("Grid convolution N=%d with a %d-point kernel", f.resolution, kernel.shape[0])
    return f.with_values(fftconvolve(f.values, kernel, mode="same"))


def multiplier_samples(order: FockOrder, half_width: float, resolution: int) -> np.ndarray:
    """b̂_n on the FFT lattice: ξ = 2π k / (N h) in numpy fftfreq order, rows along y."""
    spacing = 2.0 * half_width / resolution
    xi = 2.0 * math.pi * np.fft.fftfreq(resolution, d=spacing)
    squared = xi[None, :] ** 2 + xi[:, None] ** 2
    return u_n_many(compute_Qn(order.n), squared / 4.0)


def check_decay(f: GridFunction) -> None:
    edge, peak = f.boundary_max(), f.max_abs()
    if edge > DECAY_RATIO * peak:
        raise DecayPreconditionError(
            f"Boundary maximum {edge:.3e} exceeds {DECAY_RATIO:g} x interior maximum {peak:.3e}."
        )


def berezin_multiplier(cfg: BerezinConfig, f: GridFunction) -> GridFunction:
    """Multiply the discrete spectrum of f by b̂_n and transform back."""
    _require_plane_grid(cfg)
    check_decay(f)
    symbol = multiplier_samples(cfg.order, f.half_width, f.resolution)
    return f.with_values(np.fft.ifft2(np.fft.fft2(f.values) * symbol))


def berezin_grid(cfg: BerezinConfig, f: PointwiseFunction | GridFunction) -> GridFunction:
    """Apply B_n on the box of ``cfg`` by the configured method."""
    if cfg.method == BerezinMethod.QUADRATURE:
        if isinstance(f, GridFunction):
            raise ValueError("The quadrature method needs a pointwise function, not grid samples.")
        shell = GridFunction.zeros(cfg.grid_half_width, cfg.grid_resolution)
        values = berezin_quadrature_many(cfg, f, shell.points().ravel().tolist())
        return shell.with_values(values.reshape(shell.values.shape))
    grid = f if isinstance(f, GridFunction) else GridFunction.from_function(
        f, cfg.grid_half_width, cfg.grid_resolution
    )
    if cfg.method == BerezinMethod.GRID_CONVOLUTION:
        return berezin_convolve_grid(cfg, grid)
    return berezin_multiplier(cfg, grid)


def duality_residual(cfg: BerezinConfig, f: GridFunction, g: GridFunction) -> float:
    """|⟨B_n f, g⟩ - ⟨f, B_n g⟩| with Riemann sums over the grid (no conjugation)."""
    f.require_conformable(g)
    check_decay(f)
    check_decay(g)
    left = berezin_convolve_grid(cfg, f).inner(g)
    right = f.inner(berezin_convolve_grid(cfg, g))
    return abs(left - right)


def smoothness_limits(n: int, d: int) -> tuple[float, float]:
    """Exact limits of the axis and diagonal second difference quotients of H_{d,n} at 0.

    Near the origin H = (q₁-1)/4 + (q₂ - q₁²/2) Σt_j² / (4T) + (q₁-1)² T / 8 with
    t_j = |z_j|²/4, T = Σ t_j and q_i the coefficients of Q_n.
    """
    q = compute_Qn(n).q_poly
    q1, q2 = q.coefficient(1), q.coefficient(2)
    mixed = q2 - q1 * q1 / 2
    radial = (q1 - 1) ** 2 / 16
    axis = mixed / 8 + radial
    diagonal = mixed / (8 * d) + radial
    return float(axis), float(diagonal)


def _second_difference(n: int, direction: np.ndarray, step: float) -> float:
    sym = compute_Qn(n)
    centre = H_multi_eval(sym, tuple(0j for _ in direction))
    plus = H_multi_eval(sym, tuple(complex(c) for c in step * direction))
    minus = H_multi_eval(sym, tuple(complex(c) for c in -step * direction))
    return (plus - 2.0 * centre + minus) / step**2


def probe_H_multi_smoothness(
    n: int,
    d: int,
    steps: Sequence[float] = SMOOTHNESS_STEPS,
) -> SmoothnessReport:
    """Second difference quotients of H_{d,n} at the origin along an axis and the diagonal.

    Limits come from one Richardson step on the two smallest steps (error O(s²)).
    In one dimension the second direction is the real diagonal (1 + i)/√2.
    """
    if n < 1 or d < 1:
        raise ValueError("n and d must be positive")
    if len(steps) < 2:
        raise ValueError("Need at least two step sizes")
    axis = np.zeros(d, dtype=complex)
    axis[0] = 1.0
    if d == 1:
        diagonal = np.array([(1 + 1j) / math.sqrt(2)])
    else:
        diagonal = np.full(d, 1 / math.sqrt(d), dtype=complex)
    axis_q = [_second_difference(n, axis, s) for s in steps]
    diag_q = [_second_difference(n, diagonal, s) for s in steps]
    ratio = (steps[-2] / steps[-1]) ** 2

    def extrapolate(values: list[float]) -> float:
        return (ratio * values[-1] - values[-2]) / (ratio - 1.0)

    report = SmoothnessReport(
        n=n,
        d=d,
        steps=list(steps),
        axis_quotients=axis_q,
        diagonal_quotients=diag_q,
        axis_limit=extrapolate(axis_q),
        diagonal_limit=extrapolate(diag_q),
    )
    logger.info(
        "H smoothness n=%d d=%d: axis %.8f diagonal %.8f gap %.3e",
        n, d, report.axis_limit, report.diagonal_limit, report.gap,
    )
    return report
