"""
Tests for the bootstrap good-lambda scenario built from a spectral multiplier
"""
import numpy as np
import pytest

from src.models.lattice import Boundary, Grid
from src.models.multiplier import MultiplierFn
from src.models.weights import Weight
from src.utils.exceptions import ParameterError


@pytest.fixture
def decomposition(lattice, calculus):
    grid = Grid.centered(1, 32, 0.5, boundary=Boundary.DIRICHLET)
    return calculus.eigendecompose(lattice.build_laplacian(grid))


class TestSpectralScenario:

    def test_calibrated_scenario_passes_audit(self, scenarios, maximal, rng, decomposition):
        f = rng.standard_normal(decomposition.grid.size)
        scenario = scenarios.build_spectral_scenario(decomposition, MultiplierFn.heat(1.0), f, nu=2.0,
                                                     trials=3, seed=3)
        assert scenario.audit.passed
        assert scenario.a >= 1.0
        assert scenario.diagnostics["c_G"] >= 1.0
        assert maximal.good_lambda_check(scenario, lambda_points=8).rows

    def test_shapes_recorded(self, scenarios, rng, decomposition):
        f = rng.standard_normal(decomposition.grid.size)
        scenario = scenarios.build_spectral_scenario(decomposition, MultiplierFn.heat(1.0), f, nu=2.0,
                                                     K0=0.5, mu=2.0, trials=3, seed=3)
        assert scenario.diagnostics["c_G_shape"] == pytest.approx(0.5 ** 4)
        assert scenario.diagnostics["a_shape"] == pytest.approx(4.0 * 0.25 * 16.0)

    def test_nu_must_exceed_one(self, scenarios, rng, decomposition):
        with pytest.raises(ParameterError):
            scenarios.build_spectral_scenario(decomposition, MultiplierFn.heat(1.0),
                                              rng.standard_normal(decomposition.grid.size), nu=1.0)

    def test_finite_q_uses_both_weak_constants(self, scenarios, rng, decomposition):
        f = rng.standard_normal(decomposition.grid.size)
        scenario = scenarios.build_spectral_scenario(decomposition, MultiplierFn.heat(1.0), f, nu=2.0, q=4.0,
                                                     radii=[0, 1, 2, 4, 8], trials=3, seed=3)
        assert scenario.audit.passed
        expected = 2.0 ** (6 * (1 + 4.0)) * (scenario.c1 + scenario.cq)
        assert scenario.C0() == pytest.approx(expected)


class TestReverseHolder:

    def test_uniform_weight_norm(self, scenarios, periodic_2d):
        assert scenarios.rh_norm(Weight.uniform(periodic_2d), 1.0) == 1.0
        assert scenarios.rh_norm(Weight.uniform(periodic_2d), 2.0) == pytest.approx(1.0)

    def test_nonuniform_weight_norm(self, scenarios, rng, periodic_2d):
        w = Weight(values=rng.uniform(0.5, 2.0, periodic_2d.size), grid=periodic_2d)
        assert scenarios.rh_norm(w, 1.0) >= scenarios.rh_norm(w, 2.0) >= 1.0

    def test_family_constants(self, scenarios, periodic_2d):
        c1, c_inf = scenarios.family_constants(periodic_2d, np.inf, trials=3, seed=1)
        assert c1 >= 1.0
        assert c_inf == 1.0
