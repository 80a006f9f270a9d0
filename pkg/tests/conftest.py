import numpy as np
import pytest

from balescu.config import PlasmaConfig
from balescu.frequency import FrequencyTable
from balescu.kernel import WeightTable
from balescu.radial import RadialGrid, RadialOperator


@pytest.fixture(scope="session")
def cfg():
    return PlasmaConfig()


@pytest.fixture(scope="session")
def wtable(cfg):
    return WeightTable(cfg)


@pytest.fixture(scope="session")
def freq(cfg):
    return FrequencyTable(cfg)


@pytest.fixture(scope="session")
def radial_op(cfg, freq, wtable):
    return RadialOperator(cfg, RadialGrid(160, 8.0), freq, wtable)


@pytest.fixture(scope="session")
def radial_op_fine(cfg, freq, wtable):
    return RadialOperator(cfg, RadialGrid(320, 8.0), freq, wtable)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
