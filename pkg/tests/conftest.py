import numpy as np
import pytest

from helpers import ABSORB3, SWAP, TWO, kernel


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def swap():
    return kernel(SWAP)


@pytest.fixture
def two():
    return kernel(TWO)


@pytest.fixture
def absorb3():
    return kernel(ABSORB3)
