import numpy as np
import pytest

from floquet_dress import config as cfgmod


@pytest.fixture(scope="session")
def fig1b_cfg():
    return cfgmod.load("paper_fig1b")


@pytest.fixture(scope="session")
def fig4_cfg():
    return cfgmod.load("paper_fig4")


@pytest.fixture(scope="session")
def fig1b(fig1b_cfg):
    return cfgmod.scenario_from(fig1b_cfg)


@pytest.fixture(scope="session")
def fig4(fig4_cfg):
    return cfgmod.scenario_from(fig4_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(rng, n, scale=1.0):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (A + A.conj().T) / 2
