import numpy as np
import pytest

from shearflex.grid import make_grid


@pytest.fixture(scope="session")
def g64():
    return make_grid(64, 65)


@pytest.fixture(scope="session")
def g128():
    return make_grid(128, 129)


@pytest.fixture(scope="session")
def g256():
    return make_grid(256, 257)


def interior(a, k=2):
    """Drop k rows next to each wall."""
    return a[:, k:-k]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
