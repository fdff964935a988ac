"""
Tests for the functional calculus: eigen-oracle, Chebyshev path, kernels and propagators
"""
import numpy as np
import pytest

from src.models.lattice import Boundary, Grid
from src.models.multiplier import MultiplierFn
from src.pipeline.experiments import DECAY_RADII, VARIATION_LIMIT
from src.services.calculus_service import FunctionalCalculusService
from src.utils.exceptions import CeilingExceededError, DimensionMismatchError


@pytest.fixture
def free_dirichlet(lattice, calculus, dirichlet_1d):
    op = lattice.build_laplacian(dirichlet_1d)
    return op, calculus.eigendecompose(op)


class TestEigendecomposition:

    def test_random_potential_reconstructs(self, lattice, calculus, rng, dirichlet_1d):
        op = lattice.build_schrodinger(dirichlet_1d, rng.standard_normal(dirichlet_1d.size))
        sd = calculus.eigendecompose(op)
        assert sd.reconstruction_residual() <= 1e-8
        assert sd.orthonormality_defect() <= 1e-10
        assert np.all(np.diff(sd.eigenvalues) >= 0)

    def test_ceiling(self, lattice, periodic_2d):
        small = FunctionalCalculusService(eigen_ceiling=16)
        with pytest.raises(CeilingExceededError):
            small.eigendecompose(lattice.build_laplacian(periodic_2d))

    def test_input_length_checked(self, calculus, free_dirichlet):
        _, sd = free_dirichlet
        with pytest.raises(DimensionMismatchError):
            calculus.apply_multiplier(sd, MultiplierFn.heat(1.0), np.ones(sd.source.size - 1))


class TestOracle:

    def test_heat_multiplier_is_heat_kernel(self, lattice, calculus, rng, free_dirichlet):
        op, sd = free_dirichlet
        f = rng.standard_normal(op.size)
        via_multiplier = calculus.apply_multiplier(sd, MultiplierFn.heat(1.0), f)
        via_kernel = lattice.heat_kernel(op, 1.0, sd=sd).apply(f)
        assert np.max(np.abs(via_multiplier - via_kernel)) <= 1e-9

    def test_square_is_the_operator(self, calculus, rng, free_dirichlet):
        op, sd = free_dirichlet
        f = rng.standard_normal(op.size)
        square = MultiplierFn.from_function(lambda s: np.asarray(s) ** 2, label="s^2", value_at_zero=0.0)
        assert np.max(np.abs(calculus.apply_multiplier(sd, square, f) - op.apply(f))) <= 1e-8

    def test_constant_is_identity(self, calculus, rng, free_dirichlet):
        _, sd = free_dirichlet
        f = rng.standard_normal(sd.source.size)
        assert np.allclose(calculus.apply_multiplier(sd, MultiplierFn.constant(1.0), f), f, atol=1e-12)

    def test_spectral_norm_is_sup_of_multiplier(self, calculus, free_dirichlet):
        _, sd = free_dirichlet
        assert calculus.operator_norm_l2(sd, MultiplierFn.heat(1.0)) <= 1.0
        assert calculus.operator_norm_l2(sd, MultiplierFn.imaginary_power(2.0)) == pytest.approx(1.0)

    def test_power_one_is_the_operator(self, calculus, rng, free_dirichlet):
        op, sd = free_dirichlet
        f = rng.standard_normal(op.size)
        assert np.max(np.abs(calculus.power_apply(sd, 1.0, 0.0, f) - op.apply(f))) <= 1e-8

    def test_imaginary_power_is_unitary(self, calculus, rng, free_dirichlet):
        _, sd = free_dirichlet
        f = rng.standard_normal(sd.source.size)
        image = calculus.power_apply(sd, 0.0, 3.0, f)
        assert np.linalg.norm(image) == pytest.approx(np.linalg.norm(f), abs=1e-10)

    def test_power_rejects_theta_outside_unit_interval(self, calculus, free_dirichlet):
        _, sd = free_dirichlet
        with pytest.raises(ValueError):
            calculus.power_apply(sd, 1.5, 0.0, np.ones(sd.source.size))


class TestChebyshev:

    def test_degree_sixty_matches_oracle(self, calculus, rng, free_dirichlet):
        op, sd = free_dirichlet
        f = rng.standard_normal(op.size)
        g = MultiplierFn.heat(1.0)
        approx = calculus.apply_multiplier_chebyshev(op, g, 60, f)
        assert np.max(np.abs(approx - calculus.apply_multiplier(sd, g, f))) <= 1e-8

    def test_error_decreases_with_degree(self, calculus, rng, free_dirichlet):
        op, sd = free_dirichlet
        f = rng.standard_normal(op.size)
        report = calculus.chebyshev_convergence(op, sd, MultiplierFn.heat(1.0), f, [8, 16, 32])
        assert report.errors[1] <= report.errors[0]
        assert report.errors[2] <= report.errors[1]

    def test_imaginary_power_converges(self, calculus, rng, free_dirichlet):
        op, sd = free_dirichlet
        f = rng.standard_normal(op.size)
        report = calculus.chebyshev_convergence(op, sd, MultiplierFn.imaginary_power(1.0), f, [64, 1024])
        assert report.errors[1] < report.errors[0]

    def test_degree_zero_keeps_constant_term(self, calculus, rng, free_dirichlet):
        op, _ = free_dirichlet
        f = rng.standard_normal(op.size)
        assert np.allclose(calculus.apply_multiplier_chebyshev(op, MultiplierFn.constant(1.0), 0, f), f)

    def test_negative_degree_rejected(self, calculus, free_dirichlet):
        op, _ = free_dirichlet
        with pytest.raises(ValueError):
            calculus.apply_multiplier_chebyshev(op, MultiplierFn.heat(1.0), -1, np.ones(op.size))

    def test_interval_contains_spectrum(self, calculus, free_dirichlet):
        op, sd = free_dirichlet
        lower, upper = calculus.chebyshev_interval(op)
        assert lower <= sd.eigenvalues[0]
        assert sd.eigenvalues[-1] <= upper


class TestKernels:

    def test_real_multiplier_kernel_is_symmetric(self, calculus, free_dirichlet):
        _, sd = free_dirichlet
        kernel = calculus.multiplier_kernel(sd, MultiplierFn.smoothed_indicator(1.0))
        assert kernel.hermiticity_defect() <= 1e-10

    def test_product_of_multipliers(self, calculus, free_dirichlet):
        _, sd = free_dirichlet
        g1, g2 = MultiplierFn.heat(0.5), MultiplierFn.smoothed_indicator(2.0)
        composed = calculus.kernel_of(sd, [g1, g2])
        product = calculus.multiplier_kernel(sd, g1.times(g2))
        assert np.max(np.abs(composed.entries - product.entries)) <= 1e-9

    def test_finite_speed_with_wide_cone(self, calculus, lattice, periodic_1d):
        sd = calculus.eigendecompose(lattice.build_laplacian(periodic_1d))
        report = calculus.check_finite_speed(sd, 1.0, buffer=10.0)
        assert report.relative_mass == 0.0
        assert report.passed

    def test_weighted_schur_norm_of_identity(self, calculus, free_dirichlet):
        _, sd = free_dirichlet
        kernel = calculus.multiplier_kernel(sd, MultiplierFn.constant(1.0))
        assert calculus.weighted_schur_norm(kernel) == pytest.approx(1.0, abs=1e-10)
        assert calculus.weighted_schur_norm(kernel, calculus.bracket_profile(2.0)) == pytest.approx(1.0, abs=1e-10)

    def test_kernel_decay_constant_is_finite(self, calculus, free_dirichlet):
        _, sd = free_dirichlet
        for r in (0.5, 1.0, 2.0):
            assert np.isfinite(calculus.kernel_decay_constant(sd, r, 2.0))
            assert np.isfinite(calculus.kernel_decay_constant(sd, r, 2.0, derivative=True))

    @pytest.mark.parametrize("derivative", [False, True])
    def test_kernel_decay_constant_is_stable_across_radii(self, calculus, lattice, derivative):
        grid = Grid.centered(1, 128, 0.25, boundary=Boundary.PERIODIC)
        sd = calculus.eigendecompose(lattice.build_laplacian(grid))
        values = [calculus.kernel_decay_constant(sd, r, 2.0, derivative=derivative) for r in DECAY_RADII]
        assert min(values) > 0
        assert max(values) / min(values) < VARIATION_LIMIT

    def test_rescaling_identity(self, lattice, calculus):
        grid = Grid.centered(1, 64, 0.25, boundary=Boundary.PERIODIC)
        op = lattice.build_laplacian(grid)
        fine = calculus.eigendecompose(op)
        coarse = calculus.eigendecompose(lattice.dyadic_coarsening(op, 1))
        report = calculus.rescaling_identity_check(fine, coarse, MultiplierFn.heat(1.0), j=1)
        assert report.coarse_points == 32
        assert report.relative_difference < 0.1
