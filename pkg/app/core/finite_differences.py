import logging
from collections.abc import Callable
from typing import Any

import numpy as np

from app.core.errors import StepTooCoarseError

logger = logging.getLogger("berezin_verifier.finite_differences")

STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
STENCIL_ORDER = 4
DEFAULT_BASE_STEP = 0.16
RATIO_SLACK = 0.2

PlaneFunction = Callable[[np.ndarray], Any]


def apply_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order five-point Laplacian over the last two axes (rows = y), valid region only."""
    ny, nx = values.shape[-2:]
    if ny < 5 or nx < 5:
        raise ValueError("The five-point stencil needs at least a 5x5 patch.")
    centre = (..., slice(2, ny - 2), slice(2, nx - 2))
    result = np.zeros_like(values[centre])
    for offset, c in zip(range(-2, 3), STENCIL):
        result = result + c * values[..., 2 + offset : ny - 2 + offset, 2 : nx - 2]
        result = result + c * values[..., 2 : ny - 2, 2 + offset : nx - 2 + offset]
    return result / h**2


def composed_laplacian(f: PlaneFunction, points: Any, k: int, h: float) -> np.ndarray:
    """Δ_h^k f at each point, from a (4k+1)² patch of samples around it."""
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    if k == 0:
        return np.asarray(f(points), dtype=complex)
    offsets = np.arange(-2 * k, 2 * k + 1) * h
    patch = (
        points[:, None, None]
        + offsets[None, None, :]
        + 1j * offsets[None, :, None]
    )
    values = np.asarray(f(patch), dtype=complex)
    for _ in range(k):
        values = apply_laplacian(values, h)
    return values[:, 0, 0]


def richardson_laplacian(
    f: PlaneFunction,
    points: Any,
    k: int,
    base_step: float = DEFAULT_BASE_STEP,
) -> np.ndarray:
    """Δ^k f at the points, extrapolated from steps h, h/2, h/4 to remove the h⁴ and h⁶ terms.

    The observed ratio max|D(h) - D(h/2)| / max|D(h/2) - D(h/4)| must sit within
    20% of 2⁴, otherwise StepTooCoarseError is raised.
    """
    if k == 0:
        return composed_laplacian(f, points, 0, base_step)
    d1, d2, d3 = (composed_laplacian(f, points, k, base_step / 2**level) for level in range(3))
    upper = float(np.max(np.abs(d1 - d2)))
    lower = float(np.max(np.abs(d2 - d3)))
    scale = max(1.0, float(np.max(np.abs(d3))))
    if lower > 1e-10 * scale:
        ratio = upper / lower
        expected = 2.0**STENCIL_ORDER
        logger.debug("Richardson ladder k=%d h=%g ratio %.4f", k, base_step, ratio)
        if abs(ratio / expected - 1.0) > RATIO_SLACK:
            raise StepTooCoarseError(
                f"Richardson ratio {ratio:.3f} is more than {RATIO_SLACK:.0%} away from {expected:g} "
                f"(k={k}, h={base_step:g}).",
                ratio=ratio,
            )
    e1 = (16.0 * d2 - d1) / 15.0
    e2 = (16.0 * d3 - d2) / 15.0
    return (64.0 * e2 - e1) / 63.0


def laplacian(f: PlaneFunction, points: Any, h: float = 0.01) -> np.ndarray:
    """Single fourth-order stencil, no extrapolation."""
    return composed_laplacian(f, points, 1, h)
