import numpy as np
import pytest

from fepkit.matkit import TolerancePolicy


@pytest.fixture
def policy():
    return TolerancePolicy()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
