import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from besov_ns.spectral import make_grid

settings.register_profile(
    "default", deadline=None, max_examples=25, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid3():
    return make_grid(3, 16, 2 * np.pi)


@pytest.fixture
def grid2():
    return make_grid(2, 32, 2 * np.pi)
