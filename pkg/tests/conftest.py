import pytest

from prepsim import DEFAULT_INITIAL, DEFAULT_PARAMS, IntegrationConfig


@pytest.fixture(scope="session")
def params():
    return DEFAULT_PARAMS


@pytest.fixture(scope="session")
def initial():
    return DEFAULT_INITIAL


@pytest.fixture(scope="session")
def fast_cfg():
    """Coarse grid for tests that only need qualitative trajectories."""
    return IntegrationConfig(step_h=0.01, t_final=25.0)
