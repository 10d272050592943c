from collections.abc import Callable
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict


class CatalogFunction(BaseModel):
    """A named test function together with what B_n should return for it, when known."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    description: str
    f: Callable[[Any], Any]
    harmonic: bool = False
    decaying: bool = False
    image: Optional[Callable[[int, Any], Any]] = None

    def __call__(self, w: Any) -> Any:
        return self.f(w)

    def expected(self, n: int, z: Any) -> Any:
        if self.image is None:
            return None
        return self.image(n, z)


def _one(w: Any) -> Any:
    return np.ones_like(np.asarray(w), dtype=complex)


def _gauss_image(n: int, z: Any) -> Any:
    # B_1 e^{-|w|²} = e^{-|z|²/2} / 2; no closed form is carried for n >= 2
    if n != 1:
        return None
    return 0.5 * np.exp(-np.abs(z) ** 2 / 2)


CATALOG: dict[str, CatalogFunction] = {
    item.name: item
    for item in (
        CatalogFunction(
            name="one",
            description="constant 1",
            f=_one,
            harmonic=True,
            image=lambda n, z: _one(z),
        ),
        CatalogFunction(
            name="re_w",
            description="Re w",
            f=lambda w: np.real(w) + 0j,
            harmonic=True,
            image=lambda n, z: np.real(z) + 0j,
        ),
        CatalogFunction(
            name="re_w3",
            description="Re w³",
            f=lambda w: np.real(np.asarray(w) ** 3) + 0j,
            harmonic=True,
            image=lambda n, z: np.real(np.asarray(z) ** 3) + 0j,
        ),
        CatalogFunction(
            name="abs2",
            description="|w|², mapped to |z|² + 1 for every n",
            f=lambda w: np.abs(w) ** 2 + 0j,
            image=lambda n, z: np.abs(z) ** 2 + 1 + 0j,
        ),
        CatalogFunction(
            name="gauss",
            description="e^{-|w|²}",
            f=lambda w: np.exp(-np.abs(w) ** 2) + 0j,
            decaying=True,
            image=_gauss_image,
        ),
        CatalogFunction(
            name="bump",
            description="e^{-4|w|²}",
            f=lambda w: np.exp(-4 * np.abs(w) ** 2) + 0j,
            decaying=True,
        ),
    )
}


def get_function(name: str) -> CatalogFunction:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"Unknown catalog function {name!r}; choose from {', '.join(CATALOG)}") from None
