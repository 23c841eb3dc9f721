import numpy as np
import pytest

from ldbayes.core import Alphabet
from ldbayes.gibbs import FiniteRangePotential, build_gibbs_model
from ldbayes.posterior import LossSpec, ThetaGrid

THETA_STAR = 0.8


def match_potential(alphabet, theta):
    # theta * 1{x0 == x1} tabulated over ordered pairs
    return FiniteRangePotential(alphabet, 2, theta * np.array([1.0, 0.0, 0.0, 1.0]))


@pytest.fixture(scope="session")
def binary():
    return Alphabet(("0", "1"))


@pytest.fixture(scope="session")
def mismatch_loss(binary):
    return LossSpec(binary, binary, 1, np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture(scope="session")
def theta_grid():
    return ThetaGrid.uniform(np.linspace(-2.0, 2.0, 41))


@pytest.fixture(scope="session")
def gibbs_family(binary, theta_grid):
    return [build_gibbs_model(match_potential(binary, th)) for th in theta_grid.points]


@pytest.fixture(scope="session")
def observation_model(binary):
    return build_gibbs_model(match_potential(binary, THETA_STAR))
