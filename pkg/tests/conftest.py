"""
Shared fixtures: small grids and service instances
"""
import os

os.environ.setdefault("SKIP_CONFIG_VALIDATION", "true")
os.environ.setdefault("LOG_FILE", "")
os.environ.setdefault("SHOW_PROGRESS", "false")

import numpy as np
import pytest

from src.models.lattice import Boundary, Grid
from src.services.calculus_service import FunctionalCalculusService
from src.services.lattice_service import LatticeService
from src.services.maximal_service import MaximalService
from src.services.norm_service import MultiplierNormService
from src.services.scenario_service import ScenarioService
from src.services.weight_service import WeightService


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def calculus():
    return FunctionalCalculusService()


@pytest.fixture
def lattice(calculus):
    return LatticeService(calculus)


@pytest.fixture
def norms():
    return MultiplierNormService()


@pytest.fixture
def weights():
    return WeightService()


@pytest.fixture
def maximal(weights):
    return MaximalService(weights)


@pytest.fixture
def scenarios(calculus, maximal, weights):
    return ScenarioService(calculus, maximal, weights)


@pytest.fixture
def dirichlet_1d():
    """N=64 over a box of length 16"""
    return Grid.centered(1, 64, 0.25, boundary=Boundary.DIRICHLET)


@pytest.fixture
def periodic_1d():
    return Grid.centered(1, 64, 0.25, boundary=Boundary.PERIODIC)


@pytest.fixture
def periodic_2d():
    return Grid.centered(2, 8, 0.5, boundary=Boundary.PERIODIC)


@pytest.fixture
def dirichlet_3d():
    return Grid.centered(3, 6, 0.5, boundary=Boundary.DIRICHLET)
