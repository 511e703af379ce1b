from collections.abc import Callable

import numpy as np
import pytest

from ncycle_entropic.core.box import Box
from ncycle_entropic.core.boxes import isotropic_box, random_ns_box
from ncycle_entropic.core.gamma import GammaVector


@pytest.fixture
def canonical() -> Callable[[int], GammaVector]:
    """Factory for the canonical sign vector (+,…,+,-)."""
    return GammaVector.canonical


@pytest.fixture
def iso() -> Callable[..., Box]:
    """Factory fixture for isotropic boxes."""

    def _builder(n: int, epsilon: float, gamma: GammaVector | None = None) -> Box:
        return isotropic_box(n, epsilon, gamma)

    return _builder


@pytest.fixture
def random_box() -> Callable[..., Box]:
    """Factory fixture for reproducible random nonsignalling boxes."""

    def _builder(n: int, index: int, seed: int = 1234) -> Box:
        return random_ns_box(n, np.random.default_rng([seed, index]))

    return _builder
