import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# derandomized so repeated runs draw the same examples
settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
