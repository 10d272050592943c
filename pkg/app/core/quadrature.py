import logging
import math
from collections.abc import Callable
from enum import StrEnum
from functools import lru_cache
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import roots_genlaguerre

from app.core.errors import InsufficientQuadratureError

logger = logging.getLogger("berezin_verifier.quadrature")

# scipy's Golub–Welsch weights lose positivity well before 512 nodes.
MAX_RADIAL_NODES = 256
MAX_ANGULAR_NODES = 4096


class QuadratureKind(StrEnum):
    GAUSS_LAGUERRE_RADIAL = "gauss_laguerre_radial"
    TRAPEZOID_ANGULAR = "trapezoid_angular"
    TENSOR = "tensor"


class QuadratureRule(BaseModel):
    """Nodes and positive weights of a one- or two-stage rule.

    Tensor rules carry complex nodes √t_i e^{iθ_j} in the plane; the other kinds
    carry real nodes on the half line or the circle.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: QuadratureKind
    nodes: np.ndarray
    weights: np.ndarray
    radial_nodes: int = Field(default=0, ge=0)
    angular_nodes: int = Field(default=0, ge=0)
    alpha: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def validate_weights(self) -> "QuadratureRule":
        if self.nodes.shape != self.weights.shape:
            raise ValueError("Quadrature nodes and weights must have equal lengths.")
        if self.weights.size == 0:
            raise ValueError("A quadrature rule needs at least one node.")
        if not np.all(self.weights > 0):
            raise ValueError("Quadrature weights must be positive.")
        return self

    @property
    def size(self) -> int:
        return int(self.weights.size)

    def refined(self) -> "QuadratureRule":
        match self.kind:
            case QuadratureKind.GAUSS_LAGUERRE_RADIAL:
                return gauss_laguerre_rule(2 * self.radial_nodes, self.alpha)
            case QuadratureKind.TRAPEZOID_ANGULAR:
                return trapezoid_rule(2 * self.angular_nodes)
            case QuadratureKind.TENSOR:
                return polar_rule(2 * self.radial_nodes, 2 * self.angular_nodes, self.alpha)

    def with_weights(self, nodes: np.ndarray, weights: np.ndarray) -> "QuadratureRule":
        return self.model_copy(update={"nodes": _frozen(nodes), "weights": _frozen(weights)})


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@lru_cache(maxsize=64)
def _laguerre_nodes(nodes: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    t, w = roots_genlaguerre(nodes, alpha)
    keep = np.isfinite(w) & (w > 0) & np.isfinite(t)
    if not np.all(keep):
        logger.debug(
            "Dropped %d underflowing Gauss–Laguerre weights (n=%d, alpha=%g)",
            int(np.count_nonzero(~keep)), nodes, alpha,
        )
    return _frozen(t[keep]), _frozen(w[keep])


def gauss_laguerre_rule(nodes: int, alpha: float = 0.0) -> QuadratureRule:
    """Generalized Gauss–Laguerre rule for the weight t^alpha e^{-t} on (0, ∞)."""
    if nodes < 1:
        raise ValueError("A Gauss–Laguerre rule needs at least one node.")
    if nodes > MAX_RADIAL_NODES:
        raise InsufficientQuadratureError(
            f"Requested {nodes} Gauss–Laguerre nodes; the cap is {MAX_RADIAL_NODES}."
        )
    t, w = _laguerre_nodes(nodes, float(alpha))
    return QuadratureRule(
        kind=QuadratureKind.GAUSS_LAGUERRE_RADIAL,
        nodes=t,
        weights=w,
        radial_nodes=nodes,
        alpha=alpha,
    )


def trapezoid_rule(nodes: int) -> QuadratureRule:
    """Uniform angles 2πj/M with weights 1/M (the mean over the circle)."""
    if nodes < 1:
        raise ValueError("A trapezoid rule needs at least one node.")
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    return QuadratureRule(
        kind=QuadratureKind.TRAPEZOID_ANGULAR,
        nodes=_frozen(theta),
        weights=_frozen(np.full(nodes, 1.0 / nodes)),
        angular_nodes=nodes,
    )


def polar_rule(radial: int, angular: int, alpha: float = 0.0) -> QuadratureRule:
    """Tensor rule for the Gaussian probability measure e^{-|w|²} dλ(w)/π.

    With t = r² the measure becomes e^{-t} dt × dθ/2π, so radial Gauss–Laguerre
    nodes pair with uniform angles and the weights sum to Γ(alpha + 1).
    """
    radial_rule = gauss_laguerre_rule(radial, alpha)
    angular_rule = trapezoid_rule(angular)
    r = np.sqrt(radial_rule.nodes)
    nodes = (r[:, None] * np.exp(1j * angular_rule.nodes[None, :])).ravel()
    weights = (radial_rule.weights[:, None] * angular_rule.weights[None, :]).ravel()
    return QuadratureRule(
        kind=QuadratureKind.TENSOR,
        nodes=_frozen(nodes),
        weights=_frozen(weights),
        radial_nodes=radial,
        angular_nodes=angular,
        alpha=alpha,
    )


def integrate(fn: Callable[[np.ndarray], Any], rule: QuadratureRule) -> complex:
    values = np.asarray(fn(rule.nodes))
    return complex(np.sum(rule.weights * values))


def can_refine(rule: QuadratureRule) -> bool:
    """Whether ``rule.refined()`` stays within the node caps."""
    radial_ok = 2 * rule.radial_nodes <= MAX_RADIAL_NODES
    angular_ok = 2 * rule.angular_nodes <= MAX_ANGULAR_NODES
    match rule.kind:
        case QuadratureKind.GAUSS_LAGUERRE_RADIAL:
            return radial_ok
        case QuadratureKind.TRAPEZOID_ANGULAR:
            return angular_ok
        case QuadratureKind.TENSOR:
            return radial_ok and angular_ok


def integrate_converged(
    fn: Callable[[np.ndarray], Any],
    rule: QuadratureRule,
    tolerance: float,
    scale: float = 1.0,
) -> complex:
    """Double the nodes of ``rule`` until two successive estimates agree.

    Agreement means a change of at most ``tolerance * max(scale, |estimate|)``;
    the finer estimate is returned. Hitting the node cap first raises
    InsufficientQuadratureError with the last two estimates.
    """
    coarse = integrate(fn, rule)
    estimates: tuple[complex, ...] = (coarse,)
    while can_refine(rule):
        finer = rule.refined()
        fine = integrate(fn, finer)
        change = abs(fine - coarse)
        allowed = tolerance * max(scale, abs(fine))
        logger.debug(
            "%s rule %d -> %d nodes changed the integral by %.3e (allowed %.3e)",
            rule.kind, rule.size, finer.size, change, allowed,
        )
        if change <= allowed:
            return fine
        estimates = (coarse, fine)
        rule, coarse = finer, fine
    raise InsufficientQuadratureError(
        f"{rule.kind} rule reached the node cap at {rule.size} nodes without two agreeing estimates.",
        estimates=estimates,
    )
