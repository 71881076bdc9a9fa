import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from truncdep import CopulaFamily, ModelParams, StudyDesign, simulate_truncated

settings.register_profile(
    "default",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def gb_sample():
    """One medium Gumbel-Barnett sample at interior truth, shared read-only."""
    params = ModelParams(CopulaFamily.GUMBEL_BARNETT, 0.05, 0.3)
    design = StudyDesign(24.0, 3.0)
    sample = simulate_truncated(params, design, 30_000, np.random.default_rng(2024))
    return params, design, sample


@pytest.fixture(scope="session")
def fgm_sample():
    params = ModelParams(CopulaFamily.FGM, 0.08, 0.4)
    design = StudyDesign(24.0, 3.0)
    sample = simulate_truncated(params, design, 30_000, np.random.default_rng(4048))
    return params, design, sample
