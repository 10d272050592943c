from fractions import Fraction
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

Number = int | Fraction


class RationalPoly(BaseModel):
    """Univariate polynomial with exact rational coefficients, ascending degree.

    Trailing zeros are stripped on construction, so the zero polynomial is the
    empty coefficient tuple and ``degree`` is -1 for it.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeffs: tuple[Fraction, ...] = ()

    @field_validator("coeffs", mode="before")
    @classmethod
    def normalize_coeffs(cls, value: Any) -> tuple[Fraction, ...]:
        coeffs = []
        for item in value:
            if isinstance(item, bool) or isinstance(item, complex):
                raise ValueError(f"Unsupported coefficient {item!r}")
            coeffs.append(Fraction(item))
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        return tuple(coeffs)

    @classmethod
    def of(cls, *coeffs: Number | str) -> "RationalPoly":
        return cls(coeffs=coeffs)

    @classmethod
    def monomial(cls, degree: int, coeff: Number = 1) -> "RationalPoly":
        return cls(coeffs=[0] * degree + [coeff])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, power: int) -> Fraction:
        if 0 <= power < len(self.coeffs):
            return self.coeffs[power]
        return Fraction(0)

    def __add__(self, other: "RationalPoly | Number") -> "RationalPoly":
        other = _as_poly(other)
        size = max(len(self.coeffs), len(other.coeffs))
        return RationalPoly(
            coeffs=[self.coefficient(i) + other.coefficient(i) for i in range(size)]
        )

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly(coeffs=[-c for c in self.coeffs])

    def __sub__(self, other: "RationalPoly | Number") -> "RationalPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other: Number) -> "RationalPoly":
        return _as_poly(other) - self

    def __mul__(self, other: "RationalPoly | Number") -> "RationalPoly":
        other = _as_poly(other)
        if not self.coeffs or not other.coeffs:
            return RationalPoly()
        product = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                product[i + j] += a * b
        return RationalPoly(coeffs=product)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Number) -> "RationalPoly":
        return RationalPoly(coeffs=[c / Fraction(scalar) for c in self.coeffs])

    def __call__(self, x: Number) -> Fraction:
        """Exact Horner evaluation at a rational point."""
        result = Fraction(0)
        point = Fraction(x)
        for c in reversed(self.coeffs):
            result = result * point + c
        return result

    def evaluate(self, x: Any) -> Any:
        """Floating evaluation; accepts floats, complex numbers or numpy arrays."""
        result = np.zeros_like(np.asarray(x), dtype=np.result_type(x, float))
        for c in reversed(self.float_coeffs()):
            result = result * x + c
        if np.ndim(result) == 0:
            return result.item()
        return result

    def float_coeffs(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.coeffs)

    def derivative(self) -> "RationalPoly":
        return RationalPoly(coeffs=[c * i for i, c in enumerate(self.coeffs)][1:])

    def compose_linear(self, scale: Number) -> "RationalPoly":
        """Return p(scale * x)."""
        factor = Fraction(scale)
        return RationalPoly(coeffs=[c * factor**i for i, c in enumerate(self.coeffs)])

    def without_constant(self) -> "RationalPoly":
        return RationalPoly(coeffs=[Fraction(0), *self.coeffs[1:]])

    def parity(self) -> int | None:
        """0 if even, 1 if odd, None if mixed (the zero polynomial counts as even)."""
        powers = {i % 2 for i, c in enumerate(self.coeffs) if c != 0}
        if not powers:
            return 0
        if len(powers) == 2:
            return None
        return powers.pop()

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs] or ["0"]

    @classmethod
    def from_strings(cls, values: list[str]) -> "RationalPoly":
        return cls(coeffs=[Fraction(v) for v in values])


def _as_poly(value: "RationalPoly | Number") -> RationalPoly:
    if isinstance(value, RationalPoly):
        return value
    return RationalPoly(coeffs=[value])
