from collections.abc import Callable
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.errors import NonConformableGridError


class GridFunction(BaseModel):
    """Complex samples on the cell centres of the box [-R, R]².

    Sample ``values[j, i]`` sits at x_i = -R + (i + 1/2)h, y_j = -R + (j + 1/2)h
    with h = 2R/N, so rows run along y.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    half_width: float = Field(gt=0)
    resolution: int = Field(ge=2)
    values: np.ndarray

    @field_validator("resolution")
    @classmethod
    def validate_even(cls, value: int) -> int:
        if value % 2:
            raise ValueError("Grid resolution must be even.")
        return value

    @field_validator("values", mode="before")
    @classmethod
    def freeze_values(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=np.complex128, copy=True)
        if not np.all(np.isfinite(array)):
            raise ValueError("Grid values must be finite.")
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def validate_shape(self) -> "GridFunction":
        expected = (self.resolution, self.resolution)
        if self.values.shape != expected:
            raise ValueError(f"Grid values have shape {self.values.shape}, expected {expected}.")
        return self

    @classmethod
    def from_function(
        cls,
        f: Callable[[np.ndarray], Any],
        half_width: float,
        resolution: int,
    ) -> "GridFunction":
        shell = cls.zeros(half_width, resolution)
        values = np.broadcast_to(f(shell.points()), shell.values.shape)
        return cls(half_width=half_width, resolution=resolution, values=values)

    @classmethod
    def zeros(cls, half_width: float, resolution: int) -> "GridFunction":
        return cls(
            half_width=half_width,
            resolution=resolution,
            values=np.zeros((resolution, resolution), dtype=np.complex128),
        )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.resolution

    def axis(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.resolution) + 0.5) * self.spacing

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.axis(), self.axis(), indexing="xy")

    def points(self) -> np.ndarray:
        x, y = self.coordinates()
        return x + 1j * y

    def with_values(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(half_width=self.half_width, resolution=self.resolution, values=values)

    def conformable(self, other: "GridFunction") -> bool:
        return self.resolution == other.resolution and self.half_width == other.half_width

    def require_conformable(self, other: "GridFunction") -> None:
        if not self.conformable(other):
            raise NonConformableGridError(
                f"Grids (R={self.half_width}, N={self.resolution}) and "
                f"(R={other.half_width}, N={other.resolution}) are not conformable."
            )

    def index_of(self, point: complex) -> tuple[int, int]:
        """(row, column) of the cell containing ``point``."""
        h = self.spacing
        i = int(np.floor((point.real + self.half_width) / h))
        j = int(np.floor((point.imag + self.half_width) / h))
        if not (0 <= i < self.resolution and 0 <= j < self.resolution):
            raise ValueError(f"Point {point} lies outside the grid box.")
        return j, i

    def value_at(self, point: complex) -> complex:
        return complex(self.values[self.index_of(point)])

    def interior_mask(self, band: float) -> np.ndarray:
        """Cells with |x|, |y| <= R - band."""
        x, y = self.coordinates()
        limit = self.half_width - band
        return (np.abs(x) <= limit) & (np.abs(y) <= limit)

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def inner(self, other: "GridFunction") -> complex:
        """Riemann sum of the pointwise product (no conjugation) times h²."""
        self.require_conformable(other)
        return complex(np.sum(self.values * other.values) * self.spacing**2)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self.require_conformable(other)
        return self.with_values(self.values - other.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self.require_conformable(other)
        return self.with_values(self.values + other.values)
