import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from prsbench.qcore import RandomStream

settings.register_profile(
    "ci",
    deadline=None,
    derandomize=True,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture
def rng():
    """Fresh deterministic stream per test."""
    return RandomStream(0xC0FFEE)


def random_state_amps(gen: np.random.Generator, dim: int) -> np.ndarray:
    """Normalized complex Gaussian vector (test helper, not Haar-audited)."""
    v = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    return v / np.linalg.norm(v)
