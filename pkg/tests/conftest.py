import os
import sys

import pytest

# Add the project root directory to sys.path so tests can import the app package
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from app.models.domain import BerezinConfig  # noqa: E402


@pytest.fixture
def config_for():
    """Factory for validated configs; keyword overrides pass straight through."""

    def build(n: int, d: int = 1, **overrides) -> BerezinConfig:
        return BerezinConfig.for_order(n, d, **overrides)

    return build


@pytest.fixture
def plane_probes():
    return [0j, 1 + 1j, -1.5 + 0.5j, 2j, 0.7 - 1.2j]
