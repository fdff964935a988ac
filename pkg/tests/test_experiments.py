"""
Tests for the experiment runner: norm estimation and small end-to-end experiments
"""
import numpy as np
import pytest

from src.models.experiment import ExperimentConfig, ExperimentId, GridConfig, MultiplierConfig
from src.models.lattice import Boundary
from src.models.multiplier import MultiplierKind
from src.pipeline.experiments import DECAY_RADII, MU_GROWTH_REPORTED, MU_GROWTH_SLACK, VARIATION_LIMIT, ExperimentRunner
from src.utils.exceptions import ParameterError


@pytest.fixture
def runner(calculus, lattice, norms, weights, maximal, scenarios):
    return ExperimentRunner(timings=False, calculus=calculus, lattice=lattice, norms=norms, weights=weights,
                            maximal=maximal, scenarios=scenarios)


def rows_by_quantity(rows, quantity):
    return [row for row in rows if f"quantity={quantity}" in row.params]


def parse_params(row):
    return dict(part.split("=", 1) for part in row.params.split(";"))


class TestNormEstimation:

    def test_identity(self, runner, dirichlet_1d):
        value = runner.operator_norm_estimate(lambda f: f, 2.0, None, dirichlet_1d, trials=6, seed=1)
        assert value == pytest.approx(1.0, rel=1e-12)

    def test_scaling(self, runner, dirichlet_1d):
        value = runner.operator_norm_estimate(lambda f: 3.0 * f, 3.0, None, dirichlet_1d, trials=6, seed=1)
        assert value == pytest.approx(3.0, rel=1e-12)

    @pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
    def test_heat_semigroup_contracts(self, runner, lattice, dirichlet_1d, p):
        kernel = lattice.heat_kernel(lattice.build_laplacian(dirichlet_1d), 1.0)
        value = runner.operator_norm_estimate(kernel.apply, p, None, dirichlet_1d, trials=6, seed=2)
        assert 0.0 < value <= 1.0 + 1e-10

    def test_monotone_in_trials(self, runner, lattice, periodic_1d):
        op = lattice.build_schrodinger(periodic_1d, np.exp(-periodic_1d.radius() ** 2))
        kernel = lattice.heat_kernel(op, 0.5)
        few = runner.operator_norm_estimate(kernel.apply, 3.0, None, periodic_1d, trials=4, seed=9)
        many = runner.operator_norm_estimate(kernel.apply, 3.0, None, periodic_1d, trials=8, seed=9)
        assert many >= few

    @pytest.mark.parametrize("p", [1.0, np.inf])
    def test_exponent_range(self, runner, dirichlet_1d, p):
        with pytest.raises(ValueError):
            runner.operator_norm_estimate(lambda f: f, p, None, dirichlet_1d)

    def test_ratio_of_identical_maps(self, runner, dirichlet_1d):
        value = runner.ratio_supremum(lambda f: 2.0 * f, lambda f: 2.0 * f, 2.0, None, dirichlet_1d, trials=3)
        assert value == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("trial", [0, 1, 2])
    def test_random_inputs_are_finite_and_nonzero(self, periodic_2d, trial):
        f = ExperimentRunner.random_input(periodic_2d, trial, np.random.default_rng(0))
        assert f.shape == (periodic_2d.size,)
        assert np.all(np.isfinite(f))
        assert np.abs(f).max() > 0


class TestExperiments:

    def test_constant_multiplier_lp_norm(self, runner):
        cfg = ExperimentConfig(
            experiment=ExperimentId.E1, name="identity",
            grid=GridConfig(dim=1, n_points=16, length=8.0, boundary=Boundary.PERIODIC),
            multiplier=MultiplierConfig(kind=MultiplierKind.CONSTANT, params={"c": 1.0}),
            p_values=[2.0, 4.0], times=[1.0], trials=3,
        )
        rows = runner.run_experiment(cfg)
        lp_rows = rows_by_quantity(rows, "lp_norm")
        assert len(lp_rows) == 2
        for row in lp_rows:
            assert row.measured == pytest.approx(1.0, rel=1e-10)
            assert "name=identity" in row.params
        assert all(row.passed for row in rows)
        assert all(row.runtime_ms == 0.0 for row in rows)

    def test_imaginary_power_of_order_zero(self, runner):
        cfg = ExperimentConfig(
            experiment=ExperimentId.E2,
            grid=GridConfig(dim=1, n_points=16, length=8.0, boundary=Boundary.DIRICHLET),
            p_values=[1.5, 3.0], y_values=[0.0], trials=3,
        )
        rows = runner.run_experiment(cfg)
        assert len(rows) == 2
        for row in rows:
            assert row.measured == pytest.approx(1.0, rel=1e-10)
            assert row.passed

    def test_kato_constant_grows(self, runner):
        cfg = ExperimentConfig(
            experiment=ExperimentId.E6,
            grid=GridConfig(dim=3, n_points=6, length=3.0, boundary=Boundary.DIRICHLET),
            kato_ratios=[0.3, 0.6], times=[0.5, 1.0], d=8.0,
        )
        rows = runner.run_experiment(cfg)
        assert len(rows_by_quantity(rows, "K0")) == 2
        monotone = rows_by_quantity(rows, "K0_monotonicity")
        assert len(monotone) == 1
        assert monotone[0].passed

    def test_hypotheses_checked_before_running(self, runner):
        cfg = ExperimentConfig(
            experiment=ExperimentId.E6,
            grid=GridConfig(dim=2, n_points=6, length=3.0),
        )
        with pytest.raises(ParameterError):
            runner.run_experiment(cfg)

    def test_fitted_factor_rejects_growth_in_p(self, runner, monkeypatch):
        monkeypatch.setattr(runner, "operator_norm_estimate", lambda apply, p, *args, **kwargs: p ** 9)
        cfg = ExperimentConfig(
            experiment=ExperimentId.E1,
            grid=GridConfig(dim=1, n_points=16, length=8.0, boundary=Boundary.PERIODIC),
            multiplier=MultiplierConfig(kind=MultiplierKind.CONSTANT, params={"c": 1.0}),
            p_values=[1.25, 2.0, 4.0], times=[1.0], trials=3,
        )
        rows = runner.run_experiment(cfg)
        fitted = rows_by_quantity(rows, "fitted_factor")
        assert len(fitted) == 2
        assert not any(row.passed for row in fitted)
        excess = rows_by_quantity(rows, "fitted_factor_excess")[0]
        assert excess.measured > VARIATION_LIMIT

    def test_kernel_decay_default_radii(self, runner):
        cfg = ExperimentConfig(
            experiment=ExperimentId.E5,
            grid=GridConfig(dim=1, n_points=32, length=8.0, boundary=Boundary.PERIODIC),
            a_values=[],
        )
        rows = runner.run_experiment(cfg)
        decay = [parse_params(row) for row in rows]
        radii = [float(params["r"]) for params in decay if params["quantity"] == "psi_decay"]
        assert radii == list(DECAY_RADII)

    def test_mu_growth_row_reports_its_bound(self, runner):
        cfg = ExperimentConfig(
            experiment=ExperimentId.E2,
            grid=GridConfig(dim=1, n_points=16, length=8.0, boundary=Boundary.DIRICHLET),
            p_values=[2.0], y_values=[1.0, 2.0, 4.0], a_values=[1.0], trials=2,
        )
        rows = runner.run_experiment(cfg)
        growth = rows_by_quantity(rows, "mu_growth_exponent")
        assert len(growth) == 1
        assert growth[0].predicted == pytest.approx(1.0 + MU_GROWTH_SLACK)
        assert float(parse_params(growth[0])["reference"]) == pytest.approx(1.0 + MU_GROWTH_REPORTED)


class TestFittedFactor:

    def test_proportional_norms_fit_exactly(self):
        shape = {p: 6.0 * (p + 1.0 / (p - 1.0)) for p in (1.25, 2.0, 4.0)}
        measured = {p: {16: 0.5 * s, 32: 0.5 * s} for p, s in shape.items()}
        factor, excess = ExperimentRunner.fitted_factor(measured, 16)
        assert factor == pytest.approx(0.5)
        assert excess == pytest.approx(1.0)

    def test_growth_in_p_exceeds_the_limit(self):
        measured = {p: {16: p ** 9} for p in (1.25, 2.0, 4.0)}
        _, excess = ExperimentRunner.fitted_factor(measured, 16)
        assert excess > VARIATION_LIMIT

    def test_vanishing_measurement(self):
        measured = {p: {16: 0.0 if p == 2.0 else 1.0} for p in (1.25, 2.0)}
        factor, excess = ExperimentRunner.fitted_factor(measured, 16)
        assert np.isnan(factor)
        assert excess == np.inf
