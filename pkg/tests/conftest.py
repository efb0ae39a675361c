import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)


@pytest.fixture
def random_coin4(rng):
    """Factory for Haar-ish random unit coin 4-vectors."""
    def make():
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        return v / np.sqrt(np.sum(np.abs(v) ** 2))
    return make
