import cmath
import math
from collections.abc import Sequence
from enum import StrEnum
from typing import Any, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)


class LaguerreIndex(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=0)
    beta: int = Field(default=0, ge=0)

    @field_validator("k", "beta", mode="before")
    @classmethod
    def reject_non_integers(cls, value: Any) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValueError("Laguerre indices must be integers.")
        return value


class FockOrder(BaseModel):
    """Polyanalytic order n and complex dimension d of F²_n(ℂ^d)."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    d: int = Field(default=1, ge=1)

    @property
    def min_truncation_radius(self) -> float:
        return 6.0 + math.sqrt(2 * (self.n - 1))


class ComplexPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    coordinates: tuple[complex, ...]

    @field_validator("coordinates", mode="before")
    @classmethod
    def coerce_coordinates(cls, value: Any) -> tuple[complex, ...]:
        if isinstance(value, (int, float, complex)):
            value = (value,)
        coords = tuple(complex(c) for c in value)
        if not coords:
            raise ValueError("A point needs at least one coordinate.")
        if not all(cmath.isfinite(c) for c in coords):
            raise ValueError("Point coordinates must be finite.")
        return coords

    @property
    def d(self) -> int:
        return len(self.coordinates)

    @property
    def norm_squared(self) -> float:
        return sum(c.real**2 + c.imag**2 for c in self.coordinates)


PointLike = complex | float | Sequence[complex] | ComplexPoint


def as_point(value: PointLike) -> ComplexPoint:
    if isinstance(value, ComplexPoint):
        return value
    return ComplexPoint(coordinates=value)


class BerezinMethod(StrEnum):
    QUADRATURE = "quadrature"
    GRID_CONVOLUTION = "grid_convolution"
    MULTIPLIER = "multiplier"


class BerezinConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    order: FockOrder
    method: BerezinMethod = BerezinMethod.QUADRATURE
    truncation_radius: float = Field(gt=0)
    radial_nodes: int = Field(default=64, ge=16)
    angular_nodes: int = Field(default=64, ge=16)
    tolerance: float = Field(default=1e-9, gt=0)
    grid_resolution: int = Field(default=512, ge=16)
    grid_half_width: float = Field(default=12.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def default_truncation_radius(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("truncation_radius") is None:
            order = data.get("order")
            if isinstance(order, dict):
                order = FockOrder(**order)
            if isinstance(order, FockOrder):
                data = {**data, "truncation_radius": order.min_truncation_radius}
        return data

    @model_validator(mode="after")
    def validate_support_coverage(self) -> "BerezinConfig":
        if self.truncation_radius < self.order.min_truncation_radius:
            raise ValueError(
                f"truncation_radius {self.truncation_radius:g} does not cover the "
                f"effective support of b_{self.order.n} "
                f"(need >= {self.order.min_truncation_radius:.4f})."
            )
        if self.grid_resolution % 2:
            raise ValueError("grid_resolution must be even.")
        return self

    @classmethod
    def for_order(cls, n: int, d: int = 1, **overrides: Any) -> "BerezinConfig":
        clean = {key: value for key, value in overrides.items() if value is not None}
        return cls(order=FockOrder(n=n, d=d), **clean)

    def refined(self) -> "BerezinConfig":
        return self.model_copy(
            update={
                "radial_nodes": 2 * self.radial_nodes,
                "angular_nodes": 2 * self.angular_nodes,
            }
        )


class ExponentialSymbol(BaseModel):
    """The parameter a of f_a(z) = exp(a Re z)."""

    model_config = ConfigDict(frozen=True)

    a: complex

    @field_validator("a")
    @classmethod
    def validate_finite(cls, value: complex) -> complex:
        if not cmath.isfinite(value):
            raise ValueError("a must be finite.")
        return value

    def __call__(self, z: Any) -> Any:
        return np.exp(self.a * np.real(z))


ROOT_RESIDUAL_LIMIT = 1e-10


class RootCertificate(BaseModel):
    """A nonzero solution of exp(-z/4) = P(z) for the multiplier polynomial of B_n."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    root: complex
    residual: float = Field(ge=0)
    newton_steps: int = Field(ge=0)
    seed: complex

    @model_validator(mode="after")
    def revalidate_root(self) -> "RootCertificate":
        from app.core.exotic import root_residual

        if abs(self.root) == 0:
            raise ValueError("The root z = 0 gives the constant function, not an exotic fixed point.")
        recomputed = root_residual(self.n, self.root)
        if recomputed > ROOT_RESIDUAL_LIMIT:
            raise ValueError(
                f"Root {self.root} fails re-validation: |exp(-z/4) - P(z)| = {recomputed:.3e}."
            )
        return self

    @property
    def a(self) -> complex:
        return cmath.sqrt(self.root)


class ExoticVerification(BaseModel):
    n: int
    a: complex
    fixed_point_residual: float
    closed_form_residual: float
    quadrature_residual: Optional[float] = None
    laplacian_residual: float
    harmonic: bool


class SmoothnessReport(BaseModel):
    n: int
    d: int
    steps: list[float]
    axis_quotients: list[float]
    diagonal_quotients: list[float]
    axis_limit: float
    diagonal_limit: float

    @property
    def gap(self) -> float:
        return abs(self.axis_limit - self.diagonal_limit)


class Check(BaseModel):
    name: str
    expected: float
    actual: Optional[float] = None
    tolerance: float = Field(ge=0)
    passed: bool = False
    error: Optional[str] = None

    @model_validator(mode="after")
    def compute_passed(self) -> "Check":
        self.passed = (
            self.error is None
            and self.actual is not None
            and math.isfinite(self.actual)
            and abs(self.expected - self.actual) <= self.tolerance
        )
        return self


class RunReport(BaseModel):
    command: str
    parameters: dict[str, Any] = Field(default_factory=dict)
    checks: list[Check] = Field(default_factory=list)
    results: dict[str, Any] = Field(default_factory=dict)
    wall_time_ms: int = 0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)
