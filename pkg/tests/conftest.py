import numpy as np
import pytest

from bridgedss.config import ScenarioFactors
from bridgedss.corridor import build_network
from bridgedss.corridor.datagen import generate_dataset


@pytest.fixture(scope="session")
def network():
    return build_network()


@pytest.fixture(scope="session")
def factors():
    return ScenarioFactors()


@pytest.fixture(scope="session")
def bridge_records(network, factors):
    """The full labeled 11,520-scenario dataset, generated once per session."""
    return generate_dataset(network, factors)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
