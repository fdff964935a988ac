"""
Tests for the lattice operators, heat kernels and Kato-class quantities
"""
import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from src.models.lattice import Boundary, FieldSpec, Grid, OperatorKind
from src.services.calculus_service import FunctionalCalculusService
from src.services.lattice_service import LatticeService, kato_heat_constant, kato_threshold
from src.utils.exceptions import DimensionMismatchError, GridError, ParameterError


def random_fields(grid, rng, magnetic=True, nonnegative=False):
    potential = rng.standard_normal(grid.size)
    if nonnegative:
        potential = np.abs(potential)
    vector = rng.standard_normal((grid.dim, grid.size)) if magnetic else None
    return FieldSpec(potential=potential, vector_potential=vector)


class TestOperators:

    @pytest.mark.parametrize("boundary", [Boundary.PERIODIC, Boundary.DIRICHLET])
    def test_magnetic_operator_is_hermitian(self, lattice, rng, boundary):
        grid = Grid.centered(2, 7, 0.3, boundary=boundary)
        op = lattice.build_magnetic_schrodinger(grid, random_fields(grid, rng))
        assert op.kind == OperatorKind.MAGNETIC_SCHRODINGER
        assert op.is_complex
        assert op.hermiticity_defect() <= 1e-12

    def test_kind_follows_the_fields(self, lattice, periodic_2d):
        zero = FieldSpec.zero(periodic_2d)
        assert lattice.build_magnetic_schrodinger(periodic_2d, zero).kind == OperatorKind.LAPLACIAN
        bump = FieldSpec(potential=np.exp(-periodic_2d.radius() ** 2))
        assert lattice.build_magnetic_schrodinger(periodic_2d, bump).kind == OperatorKind.SCHRODINGER

    def test_periodic_laplacian_dispersion(self, lattice, calculus, periodic_1d):
        sd = calculus.eigendecompose(lattice.build_laplacian(periodic_1d))
        h, n_points = periodic_1d.spacing, periodic_1d.points_per_axis
        expected = np.sort(4.0 / h ** 2 * np.sin(np.pi * np.arange(n_points) / n_points) ** 2)
        assert np.max(np.abs(sd.eigenvalues - expected)) <= 1e-10 * expected.max()

    def test_constant_vector_potential_shifts_the_band(self, lattice, calculus):
        grid = Grid.centered(1, 32, 0.5, boundary=Boundary.PERIODIC)
        A = 0.7
        fields = FieldSpec(potential=np.zeros(grid.size), vector_potential=np.full((1, grid.size), A))
        sd = calculus.eigendecompose(lattice.build_magnetic_schrodinger(grid, fields))
        h = grid.spacing
        k = 2.0 * np.pi * np.arange(grid.points_per_axis) / grid.length
        expected = np.sort(4.0 / h ** 2 * np.sin((k + A) * h / 2.0) ** 2)
        assert np.max(np.abs(sd.eigenvalues - expected)) <= 1e-10 * expected.max()

    def test_spectrum_inside_gershgorin_bounds(self, lattice, calculus, rng):
        grid = Grid.centered(2, 6, 0.4, boundary=Boundary.DIRICHLET)
        op = lattice.build_magnetic_schrodinger(grid, random_fields(grid, rng))
        sd = calculus.eigendecompose(op)
        assert sd.eigenvalues[0] >= op.spectral_floor - 1e-9
        assert sd.eigenvalues[-1] <= op.spectral_bound + 1e-9

    def test_stencil_needs_three_points(self, lattice):
        with pytest.raises(GridError):
            lattice.build_laplacian(Grid(dim=1, points_per_axis=2, spacing=1.0))

    def test_fields_must_match_grid(self, lattice, periodic_2d):
        with pytest.raises(DimensionMismatchError):
            lattice.build_schrodinger(periodic_2d, np.zeros(periodic_2d.size + 1))

    def test_dyadic_coarsening_rescales_potential(self, lattice):
        grid = Grid.centered(1, 16, 0.5, boundary=Boundary.PERIODIC)
        op = lattice.build_schrodinger(grid, np.full(grid.size, 0.3))
        coarse = lattice.dyadic_coarsening(op, 1)
        assert coarse.grid.points_per_axis == 8
        assert coarse.grid.spacing == grid.spacing
        assert np.allclose(coarse.dense().diagonal(), 2.0 / grid.spacing ** 2 + 4 * 0.3)

    def test_dyadic_coarsening_needs_periodic_grid(self, lattice, dirichlet_1d):
        with pytest.raises(GridError):
            lattice.dyadic_coarsening(lattice.build_laplacian(dirichlet_1d))


class TestHeatKernel:

    def test_semigroup_property(self, lattice, rng, dirichlet_1d):
        op = lattice.build_schrodinger(dirichlet_1d, np.abs(rng.standard_normal(dirichlet_1d.size)))
        product = lattice.heat_kernel(op, 0.5).compose(lattice.heat_kernel(op, 0.75))
        direct = lattice.heat_kernel(op, 1.25)
        assert np.max(np.abs(product.entries - direct.entries)) <= 1e-9

    def test_small_time_is_identity(self, lattice, dirichlet_1d):
        kernel = lattice.heat_kernel(lattice.build_laplacian(dirichlet_1d), 1e-8)
        assert np.max(np.abs(kernel.operator_matrix() - np.eye(dirichlet_1d.size))) <= 1e-6

    def test_rejects_nonpositive_time(self, lattice, dirichlet_1d):
        with pytest.raises(ValueError):
            lattice.heat_kernel(lattice.build_laplacian(dirichlet_1d), 0.0)

    def test_free_kernel_matches_image_sum(self, lattice):
        grid = Grid.centered(1, 256, 16.0 / 256, boundary=Boundary.PERIODIC)
        t = 1.0
        kernel = lattice.heat_kernel(lattice.build_laplacian(grid), t)
        column = 128
        coords = grid.coordinates()[:, 0]
        displacement = grid.wrap(coords - coords[column])
        images = np.arange(-3, 4)[:, None] * grid.length
        oracle = np.sum(np.exp(-(displacement[None, :] + images) ** 2 / (4.0 * t)), axis=0) / np.sqrt(4 * np.pi * t)
        measured = kernel.entries[:, column]
        assert np.max(np.abs(measured - oracle)) / oracle.max() <= 1e-3

    @pytest.mark.slow
    def test_gaussian_constant_stable_under_refinement(self, lattice):
        estimates = []
        for n_points in (128, 256):
            grid = Grid.centered(1, n_points, 16.0 / n_points, boundary=Boundary.PERIODIC)
            report = lattice.estimate_gaussian_constant(lattice.build_laplacian(grid), [0.5, 1.0, 2.0, 4.0], d=8.0)
            assert np.isfinite(report.K0_estimate)
            estimates.append(report.K0_estimate)
        assert abs(estimates[1] - estimates[0]) / estimates[0] < 0.1

    def test_gaussian_report_flags_violation(self, lattice, dirichlet_1d):
        op = lattice.build_laplacian(dirichlet_1d)
        report = lattice.estimate_gaussian_constant(op, [1.0], d=8.0, reference_K0=1e-6)
        assert report.max_violation == pytest.approx(report.K0_estimate - 1e-6)
        assert len(report.per_time) == 1

    @pytest.mark.parametrize("dim,n_points", [(1, 16), (2, 6)])
    def test_diamagnetic_inequality(self, lattice, rng, dim, n_points):
        for _ in range(10):
            grid = Grid.centered(dim, n_points, 0.5, boundary=Boundary.PERIODIC)
            fields = random_fields(grid, rng, nonnegative=True)
            op_A = lattice.build_magnetic_schrodinger(grid, fields)
            op_0 = lattice.build_schrodinger(grid, fields.potential)
            for t in (0.5, 1.0, 2.0):
                assert lattice.check_diamagnetic(op_A, op_0, t) <= 1e-8

    @pytest.mark.parametrize("factor", [0.25, 4.0])
    def test_gaussian_constant_is_scale_covariant(self, lattice, rng, dirichlet_1d, factor):
        op = lattice.build_schrodinger(dirichlet_1d, np.abs(rng.standard_normal(dirichlet_1d.size)))
        times = [0.5, 1.0, 2.0]
        base = lattice.estimate_gaussian_constant(op, times, d=8.0).K0_estimate
        scaled = lattice.estimate_gaussian_constant(op.rescaled(factor), [t / factor for t in times], d=8.0)
        assert scaled.K0_estimate == pytest.approx(base, rel=1e-8)

    @pytest.mark.parametrize("grid_name", ["dirichlet_1d", "periodic_2d"])
    def test_kernel_is_positive_without_magnetic_field(self, lattice, rng, request, grid_name):
        grid = request.getfixturevalue(grid_name)
        op = lattice.build_schrodinger(grid, np.abs(rng.standard_normal(grid.size)))
        for t in (0.1, 1.0, 5.0):
            entries = lattice.heat_kernel(op, t).entries
            assert entries.min() >= -1e-12 * entries.max()


class TestKato:

    def test_threshold_in_three_dimensions(self):
        assert kato_threshold(3) == pytest.approx(np.pi)

    def test_threshold_needs_three_dimensions(self):
        with pytest.raises(ParameterError):
            kato_threshold(2)

    def test_heat_constant_blows_up_at_threshold(self):
        assert kato_heat_constant(3, 0.0) == pytest.approx((2 * np.pi) ** -1.5)
        assert kato_heat_constant(3, 0.9 * np.pi) == pytest.approx(10 * (2 * np.pi) ** -1.5)
        with pytest.raises(ParameterError):
            kato_heat_constant(3, np.pi)

    def test_zero_potential(self, lattice, dirichlet_3d):
        assert lattice.kato_norm(np.zeros(dirichlet_3d.size), dirichlet_3d) == 0.0

    def test_kato_norm_needs_three_dimensions(self, lattice, periodic_2d):
        with pytest.raises(ParameterError):
            lattice.kato_norm(np.ones(periodic_2d.size), periodic_2d)

    @pytest.mark.parametrize("ratio", [0.3, 0.6, 0.9])
    def test_potential_hits_requested_ratio(self, lattice, dirichlet_3d, ratio):
        profile = (dirichlet_3d.radius() <= 1.0).astype(float)
        potential = lattice.potential_for_kato_ratio(profile, dirichlet_3d, ratio)
        assert np.all(potential <= 0)
        measured = lattice.kato_norm(np.maximum(-potential, 0.0), dirichlet_3d)
        assert measured == pytest.approx(ratio * kato_threshold(3), rel=1e-10)

    def test_ratio_must_stay_below_one(self, lattice, dirichlet_3d):
        with pytest.raises(ParameterError):
            lattice.potential_for_kato_ratio(np.ones(dirichlet_3d.size), dirichlet_3d, 1.0)

    @hypothesis_settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_kato_norm_is_monotone(self, seed):
        rng = np.random.default_rng(seed)
        grid = Grid.centered(3, 6, 0.5, boundary=Boundary.DIRICHLET)
        larger = rng.standard_normal(grid.size)
        smaller = rng.uniform(0.0, 1.0, grid.size) * larger
        service = LatticeService(FunctionalCalculusService())
        assert service.kato_norm(smaller, grid) <= service.kato_norm(larger, grid) * (1.0 + 1e-10)

    @pytest.mark.slow
    def test_unit_ball_indicator(self, lattice):
        grid = Grid.over_interval(3, 32, -1.5, 1.5, boundary=Boundary.DIRICHLET)
        indicator = (grid.radius() <= 1.0).astype(float)
        assert lattice.kato_norm(indicator, grid) == pytest.approx(2 * np.pi, rel=0.05)


class TestDifferences:

    def test_gradient_of_linear_function(self, lattice, dirichlet_1d):
        x = dirichlet_1d.coordinates()[:, 0]
        gradient = lattice.gradient(3.0 * x + 1.0, dirichlet_1d)
        assert gradient.shape == (1, dirichlet_1d.size)
        assert np.allclose(gradient[0, :-1], 3.0)

    def test_gradient_of_constant_on_torus(self, lattice, periodic_2d):
        assert np.allclose(lattice.gradient(np.full(periodic_2d.size, 2.0), periodic_2d), 0.0)

    def test_divergence_shape_check(self, lattice, periodic_2d):
        with pytest.raises(DimensionMismatchError):
            lattice.divergence(np.zeros((1, periodic_2d.size)), periodic_2d)

    def test_cav_constant_of_free_operator(self, lattice, dirichlet_3d):
        assert lattice.cav_constant(FieldSpec.zero(dirichlet_3d), dirichlet_3d) == 1.0

    def test_cav_constant_grows_with_potential(self, lattice, dirichlet_3d):
        bump = FieldSpec(potential=np.exp(-dirichlet_3d.radius() ** 2))
        small = lattice.cav_constant(bump, dirichlet_3d)
        large = lattice.cav_constant(bump.scaled(4.0), dirichlet_3d)
        assert 1.0 < small < large
        assert large - 1.0 == pytest.approx(4.0 * (small - 1.0))

    def test_cav_constant_needs_three_dimensions(self, lattice, periodic_2d):
        with pytest.raises(ParameterError):
            lattice.cav_constant(FieldSpec.zero(periodic_2d), periodic_2d)
