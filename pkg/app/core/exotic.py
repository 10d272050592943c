import cmath
import logging
import math
from collections.abc import Sequence
from fractions import Fraction
from functools import lru_cache
from typing import Any

import numpy as np

from app.core.berezin import berezin_quadrature_many
from app.core.errors import NoRootsFoundError
from app.core.finite_differences import laplacian
from app.models.domain import (
    BerezinConfig,
    ExoticVerification,
    ExponentialSymbol,
    PointLike,
    RootCertificate,
    as_point,
)
from app.models.polynomial import RationalPoly

logger = logging.getLogger("berezin_verifier.exotic")

MAX_MOMENT = 40
MAX_S_INDEX = 20
MAX_ORDER = 10
MAX_SCAN_ORDER = 6
QUADRATURE_A_LIMIT = 6.0
SCAN_OFFSET = complex(0.137, 0.291)
SAMPLES_PER_SIDE = 64
NEWTON_STEPS = 50
ACCEPT_RESIDUAL = 1e-10
MIN_ROOT_MODULUS = 1e-6
MIN_SEPARATION = 1e-6
EXP_GUARD = 700.0
STANDARD_PROBES = (0j, 0.5 + 0j, 0.5j, 0.5 + 0.5j)


def gaussian_moment_I(k: int, a: complex) -> complex:
    """π^{-1/2} ∫ x^k e^{ax - x²} dx by the integration-by-parts recurrence."""
    if not 0 <= k <= MAX_MOMENT:
        raise ValueError(f"k must lie in 0..{MAX_MOMENT}, got {k}")
    a = complex(a)
    previous = cmath.exp(a * a / 4)
    if k == 0:
        return previous
    current = a / 2 * previous
    for j in range(2, k + 1):
        previous, current = current, a / 2 * current + (j - 1) / 2 * previous
    return current


@lru_cache(maxsize=MAX_MOMENT + 1)
def moment_polynomial(k: int) -> RationalPoly:
    """P_k with I_k(a) = P_k(a) e^{a²/4}."""
    if not 0 <= k <= MAX_MOMENT:
        raise ValueError(f"k must lie in 0..{MAX_MOMENT}, got {k}")
    a = RationalPoly.of(0, 1)
    previous = RationalPoly.of(1)
    if k == 0:
        return previous
    current = a / 2
    for j in range(2, k + 1):
        previous, current = current, a * current / 2 + previous * Fraction(j - 1, 2)
    return current


def s_coefficient(m: int, a: complex) -> complex:
    """S_m(a) = Σ_j C(m, j) I_{2(m-j)}(0) I_{2j}(a)."""
    if not 0 <= m <= MAX_S_INDEX:
        raise ValueError(f"m must lie in 0..{MAX_S_INDEX}, got {m}")
    return sum(
        (math.comb(m, j) * gaussian_moment_I(2 * (m - j), 0) * gaussian_moment_I(2 * j, a) for j in range(m + 1)),
        0j,
    )


@lru_cache(maxsize=MAX_S_INDEX + 1)
def s_polynomial(m: int) -> RationalPoly:
    """S_m(a) e^{-a²/4} as an exact polynomial in a."""
    if not 0 <= m <= MAX_S_INDEX:
        raise ValueError(f"m must lie in 0..{MAX_S_INDEX}, got {m}")
    total = RationalPoly()
    for j in range(m + 1):
        total = total + math.comb(m, j) * moment_polynomial(2 * (m - j)).coefficient(0) * moment_polynomial(2 * j)
    return total


def _closed_form_weights(n: int) -> list[tuple[int, Fraction]]:
    """(k + l, coefficient) pairs of the double sum, before grouping."""
    return [
        (
            k + l,
            Fraction(
                math.comb(n, k + 1) * math.comb(n, l + 1) * (-1) ** (k + l),
                math.factorial(k) * math.factorial(l),
            ),
        )
        for k in range(n)
        for l in range(n)
    ]


def _check_order(n: int, limit: int = MAX_ORDER) -> None:
    if not 1 <= n <= limit:
        raise ValueError(f"n must lie in 1..{limit}, got {n}")


def berezin_exponential_closed_form(n: int, a: complex, z: PointLike) -> complex:
    """B_n f_a(z) = f_a(z) (1/n) Σ_{k,l} C(n,k+1) C(n,l+1) (-1)^{k+l} / (k! l!) S_{k+l}(a)."""
    _check_order(n)
    point = complex(as_point(z).coordinates[0])
    factor = sum(
        (float(weight) * s_coefficient(m, a) for m, weight in _closed_form_weights(n)),
        0j,
    ) / n
    return ExponentialSymbol(a=a)(point) * factor


@lru_cache(maxsize=MAX_ORDER)
def multiplier_polynomial_P(n: int) -> RationalPoly:
    """P with B_n f_a = P(a²) e^{a²/4} f_a, collected from the even polynomials S_m(a) e^{-a²/4}."""
    _check_order(n)
    in_a = RationalPoly()
    for m, weight in _closed_form_weights(n):
        in_a = in_a + weight * s_polynomial(m)
    in_a = in_a / n
    if in_a.parity() != 0:
        raise ArithmeticError(f"Closed-form polynomial for n={n} is not even in a")
    return RationalPoly(coeffs=in_a.coeffs[::2])


def root_function(n: int, z: Any) -> Any:
    """g(z) = e^{-z/4} - P(z)."""
    return np.exp(-np.asarray(z) / 4) - multiplier_polynomial_P(n).evaluate(z)


def root_residual(n: int, z: complex) -> float:
    return abs(cmath.exp(-z / 4) - multiplier_polynomial_P(n).evaluate(complex(z)))


def _newton(n: int, seed: complex) -> tuple[complex, int]:
    poly = multiplier_polynomial_P(n)
    slope = poly.derivative()
    z = seed
    g = cmath.exp(-z / 4) - poly.evaluate(z)
    for step in range(1, NEWTON_STEPS + 1):
        dg = -cmath.exp(-z / 4) / 4 - slope.evaluate(z)
        if dg == 0:
            return z, step
        delta = g / dg
        damping = 1.0
        for _ in range(30):
            trial = z - damping * delta
            g_trial = cmath.exp(-trial / 4) - poly.evaluate(trial)
            if abs(g_trial) < abs(g) or damping < 1e-6:
                break
            damping /= 2
        z, g = trial, g_trial
        if abs(damping * delta) <= 1e-15 * max(1.0, abs(z)):
            return z, step
    return z, NEWTON_STEPS


def _scan_squares(radius: float) -> np.ndarray:
    """Lower-left corners of the unit squares meeting the disk |z| <= radius."""
    reach = math.ceil(radius) + 2
    steps = np.arange(-reach, reach + 1)
    corners = (SCAN_OFFSET + steps[None, :] + 1j * steps[:, None]).ravel()
    nearest_x = np.clip(0.0, corners.real, corners.real + 1)
    nearest_y = np.clip(0.0, corners.imag, corners.imag + 1)
    return corners[np.hypot(nearest_x, nearest_y) <= radius]


def _boundary_parameter() -> np.ndarray:
    s = np.arange(SAMPLES_PER_SIDE) / SAMPLES_PER_SIDE
    return np.concatenate([s, 1 + 1j * s, 1 - s + 1j, 1j * (1 - s)])


def winding_numbers(n: int, corners: np.ndarray) -> np.ndarray:
    """Argument-principle count of zeros of g inside each unit square."""
    path = corners[:, None] + _boundary_parameter()[None, :]
    g = root_function(n, path)
    closed = np.concatenate([g, g[:, :1]], axis=1)
    turning = np.angle(closed[:, 1:] / closed[:, :-1]).sum(axis=1)
    return np.rint(turning / (2 * math.pi)).astype(int)


def find_exotic_roots(n: int, search_radius: float, max_roots: int | None = None) -> list[RootCertificate]:
    """Nonzero roots of e^{-z/4} = P(z) in |z| <= search_radius, sorted by (imag, real)."""
    _check_order(n, MAX_SCAN_ORDER)
    if search_radius <= 0:
        raise ValueError("search_radius must be positive")
    corners = _scan_squares(search_radius)
    windings = winding_numbers(n, corners)
    flagged = np.flatnonzero(windings != 0)
    logger.debug("Root scan n=%d: %d squares, %d with nonzero winding", n, len(corners), len(flagged))

    found: list[RootCertificate] = []
    for index in flagged:
        corner = complex(corners[index])
        seeds = [corner + (0.5 + 0.5j)]
        contains_origin = 0 <= -corner.real <= 1 and 0 <= -corner.imag <= 1
        if abs(windings[index]) > 1 or contains_origin:
            seeds += [corner + complex(x, y) for x in (0.25, 0.75) for y in (0.25, 0.75)]
        for seed in seeds:
            root, steps = _newton(n, seed)
            residual = root_residual(n, root)
            if residual > ACCEPT_RESIDUAL or abs(root) <= MIN_ROOT_MODULUS or abs(root) > search_radius:
                continue
            if any(abs(root - other.root) <= MIN_SEPARATION for other in found):
                continue
            found.append(
                RootCertificate(n=n, root=root, residual=residual, newton_steps=steps, seed=seed)
            )

    if not found:
        raise NoRootsFoundError(
            f"No nonzero root of exp(-z/4) = P(z) for n={n} within |z| <= {search_radius:g}."
        )
    if max_roots is not None:
        found = sorted(found, key=lambda c: abs(c.root))[:max_roots]
    found.sort(key=lambda c: (c.root.imag, c.root.real))
    logger.info("Found %d exotic roots for n=%d within radius %g", len(found), n, search_radius)
    return found


def exotic_config(n: int, a: complex, **overrides: Any) -> BerezinConfig:
    """Quadrature settings for f_a: 128 x 128 nodes, truncation at least 8 + |a|."""
    floor = 8.0 + abs(a)
    options: dict[str, Any] = {"radial_nodes": 128, "angular_nodes": 128, **{k: v for k, v in overrides.items() if v is not None}}
    options["truncation_radius"] = max(options.get("truncation_radius") or 0.0, floor, 6.0 + math.sqrt(2 * (n - 1)))
    return BerezinConfig.for_order(n, **options)


def exponential_fixed_point_residual(
    n: int,
    a: complex,
    probes: Sequence[PointLike] = STANDARD_PROBES,
    cfg: BerezinConfig | None = None,
) -> float:
    """max over probes of |B_n f_a(z) - f_a(z)| / |f_a(z)| by quadrature."""
    cfg = cfg or exotic_config(n, a)
    symbol = ExponentialSymbol(a=a)
    points = [complex(as_point(p).coordinates[0]) for p in probes]
    reach = abs(a.real) * (cfg.truncation_radius + max(abs(p) for p in points))
    if reach > EXP_GUARD:
        logger.warning("exp(a Re w) reaches e^%.0f on the quadrature nodes; values may overflow", reach)
    transformed = berezin_quadrature_many(cfg, symbol, points)
    exact = symbol(np.array(points))
    return float(np.max(np.abs(transformed - exact) / np.abs(exact)))


def closed_form_residual(n: int, a: complex, probes: Sequence[PointLike] = STANDARD_PROBES) -> float:
    symbol = ExponentialSymbol(a=a)
    worst = 0.0
    for p in probes:
        value = symbol(complex(as_point(p).coordinates[0]))
        worst = max(worst, abs(berezin_exponential_closed_form(n, a, p) - value) / abs(value))
    return worst


def eigen_relation_residual(a: complex, points: Sequence[PointLike], h: float = 0.01) -> float:
    """max relative |Δ_h f_a - a² f_a| / (|f_a| max(1, |a|²)) with one fourth-order stencil."""
    symbol = ExponentialSymbol(a=a)
    z = np.array([complex(as_point(p).coordinates[0]) for p in points])
    numeric = laplacian(symbol, z, h)
    values = symbol(z)
    scale = np.abs(values) * max(1.0, abs(a) ** 2)
    return float(np.max(np.abs(numeric - a * a * values) / scale))


def verify_exotic_fixed_point(
    n: int,
    cert: RootCertificate,
    probes: Sequence[PointLike] = STANDARD_PROBES,
    cfg: BerezinConfig | None = None,
) -> ExoticVerification:
    """Relative fixed-point residual of f_a, a = √root (principal branch).

    The closed form is always evaluated; quadrature confirms it only for |a| <= 6.
    """
    if cert.n != n:
        raise ValueError(f"Certificate belongs to n={cert.n}, not n={n}")
    if any(abs(as_point(p).coordinates[0]) > 1 for p in probes):
        raise ValueError("Verification probes must satisfy |z| <= 1.")
    a = cert.a
    closed = closed_form_residual(n, a, probes)
    quadrature = None
    if abs(a) <= QUADRATURE_A_LIMIT:
        quadrature = exponential_fixed_point_residual(n, a, probes, cfg or exotic_config(n, a))
    else:
        logger.warning("|a| = %.2f exceeds %.0f; relying on the closed form alone", abs(a), QUADRATURE_A_LIMIT)
    eigen = eigen_relation_residual(a, probes)
    return ExoticVerification(
        n=n,
        a=a,
        fixed_point_residual=quadrature if quadrature is not None else closed,
        closed_form_residual=closed,
        quadrature_residual=quadrature,
        laplacian_residual=eigen,
        harmonic=a == 0,
    )
