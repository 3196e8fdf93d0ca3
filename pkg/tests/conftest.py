import pytest

from endless_explore.env import EnvConfig
from endless_explore.synthetic import generate_synthetic_sessions


@pytest.fixture(scope="session")
def default_config():
    return EnvConfig()


@pytest.fixture(scope="session")
def sessions20(default_config):
    return generate_synthetic_sessions(
        default_config, schedule_seed_base=9000, n=20, seed=11)
