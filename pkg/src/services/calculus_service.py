"""
Functional Calculus Service
Computes g(sqrt H) exactly by eigendecomposition and matrix-free by Chebyshev expansion
"""
import logging
from typing import Callable, Iterable, List, Optional, Union

import numpy as np
from scipy import linalg
from scipy.fft import dct

from src.config.settings import settings
from src.models.calculus import (
    ChebyshevConvergence,
    FiniteSpeedReport,
    KernelMatrix,
    RescalingReport,
    SpectralDecomposition,
)
from src.models.cutoffs import bump_psi, dyadic_phi
from src.models.lattice import LatticeOperator
from src.models.multiplier import MultiplierFn
from src.utils.exceptions import (
    CeilingExceededError,
    DimensionMismatchError,
    EigensolverError,
    GridError,
)
from src.utils.helpers import japanese_bracket
from src.utils.monitoring import ResourceMonitor, resource_monitor

logger = logging.getLogger(__name__)

WeightProfile = Callable[[np.ndarray], np.ndarray]


class FunctionalCalculusService:
    """
    Service for spectral functions of lattice operators
    The eigendecomposition is the oracle; the Chebyshev path is checked against it
    """

    def __init__(self, eigen_ceiling: Optional[int] = None, clamp_tolerance: Optional[float] = None,
                 chebyshev_margin: Optional[float] = None, monitor: Optional[ResourceMonitor] = None):
        self.eigen_ceiling = eigen_ceiling or settings.EIGEN_CEILING
        self.clamp_tolerance = clamp_tolerance or settings.CLAMP_TOLERANCE
        self.chebyshev_margin = settings.CHEBYSHEV_MARGIN if chebyshev_margin is None else chebyshev_margin
        self.monitor = monitor or resource_monitor

    # Exact path

    def eigendecompose(self, op: LatticeOperator) -> SpectralDecomposition:
        """
        Dense Hermitian eigendecomposition of a lattice operator

        Raises:
            CeilingExceededError: if N^dim exceeds the dense ceiling
            EigensolverError: if LAPACK does not converge
        """
        size = op.size
        if size > self.eigen_ceiling:
            raise CeilingExceededError(
                f"operator of size {size} exceeds the dense ceiling {self.eigen_ceiling}"
            )
        dtype = np.complex128 if op.is_complex else np.float64
        self.monitor.ensure_dense_capacity(size, size, dtype=dtype, copies=3, label="eigendecomposition")
        try:
            eigenvalues, eigenvectors = linalg.eigh(op.dense())
        except linalg.LinAlgError as e:
            raise EigensolverError(f"eigendecomposition of {op.kind} did not converge: {e}") from e
        logger.debug(f"Eigendecomposed {op.kind} of size {size}: "
                     f"spectrum in [{eigenvalues[0]:.4g}, {eigenvalues[-1]:.4g}]")
        return SpectralDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors, source=op,
                                     clamp_tolerance=self.clamp_tolerance)

    def spectral_values(self, sd: SpectralDecomposition, g: MultiplierFn) -> np.ndarray:
        """g(sqrt(lambda_i)) with clamped eigenvalues; eigenvalues treated as 0 map to g's value at 0"""
        roots = np.sqrt(sd.clamped_eigenvalues())
        roots[sd.kernel_mask()] = 0.0
        return np.asarray(g(roots))

    def apply_multiplier(self, sd: SpectralDecomposition, g: MultiplierFn, f: np.ndarray) -> np.ndarray:
        """g(sqrt H) f = sum_i g(sqrt(lambda_i)) <f, e_i> e_i"""
        f = np.asarray(f)
        if f.shape[0] != sd.source.size:
            raise DimensionMismatchError(f"input of length {f.shape[0]} on a grid of {sd.source.size} nodes")
        result = sd.synthesize(self.spectral_values(sd, g), f)
        if np.isrealobj(f) and g.real_valued and not np.iscomplexobj(sd.eigenvectors):
            return np.real(result)
        return result

    def multiplier_kernel(self, sd: SpectralDecomposition, g: MultiplierFn) -> KernelMatrix:
        """Kernel of g(sqrt H) with the 1/h^n density convention"""
        values = self.spectral_values(sd, g)
        matrix = sd.matrix_function(values)
        if g.real_valued and not np.iscomplexobj(sd.eigenvectors):
            matrix = np.real(matrix)
        return KernelMatrix.from_operator_matrix(matrix, sd.grid, label=g.label)

    def power_apply(self, sd: SpectralDecomposition, theta: float, y: float, f: np.ndarray) -> np.ndarray:
        """
        H^{theta + iy} f with 0^{theta + iy} := 0

        Args:
            sd: Decomposition of H
            theta: Real part of the exponent, in [0, 1]
            y: Imaginary part of the exponent
            f: Grid function
        """
        if not 0.0 <= theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {theta}")
        eigenvalues = sd.clamped_eigenvalues()
        off_kernel = ~sd.kernel_mask()
        values = np.zeros(eigenvalues.shape, dtype=complex)
        values[off_kernel] = np.exp((theta + 1j * y) * np.log(eigenvalues[off_kernel]))
        result = sd.synthesize(values, np.asarray(f))
        if y == 0 and np.isrealobj(f) and not np.iscomplexobj(sd.eigenvectors):
            return np.real(result)
        return result

    # Chebyshev path

    def chebyshev_interval(self, op: LatticeOperator) -> tuple:
        """[min(0, floor), bound (1 + margin)]: the spectrum always lies inside"""
        lower = min(0.0, op.spectral_floor)
        upper = op.spectral_bound * (1.0 + self.chebyshev_margin)
        return lower, upper

    def chebyshev_coefficients(self, func: Callable[[np.ndarray], np.ndarray], lower: float, upper: float,
                               count: int) -> np.ndarray:
        """
        Chebyshev coefficients of func on [lower, upper] from its values at the Chebyshev points

        Args:
            func: Vectorized function of lambda
            lower, upper: Interval containing the spectrum
            count: Number of coefficients (degree + 1)
        """
        nodes = np.cos((2 * np.arange(count) + 1) * np.pi / (2 * count))
        samples = np.asarray(func(0.5 * (nodes * (upper - lower) + upper + lower)))
        if np.iscomplexobj(samples):
            coefficients = (dct(samples.real) + 1j * dct(samples.imag)) / count
        else:
            coefficients = dct(samples) / count
        coefficients[0] = coefficients[0] / 2
        return coefficients

    def apply_multiplier_chebyshev(self, op: LatticeOperator, g: MultiplierFn, degree: int,
                                   f: np.ndarray) -> np.ndarray:
        """
        Chebyshev expansion of lambda -> g(sqrt(max(lambda, 0))) applied by the three-term recurrence

        Args:
            op: Operator with cached spectral bounds
            g: Multiplier
            degree: Polynomial degree (0 gives the constant term only)
            f: Grid function or block of columns
        """
        if degree < 0:
            raise ValueError(f"Chebyshev degree must be nonnegative, got {degree}")
        lower, upper = self.chebyshev_interval(op)
        coefficients = self.chebyshev_coefficients(
            lambda lam: g(np.sqrt(np.maximum(lam, 0.0))), lower, upper, degree + 1
        )
        return self._chebyshev_sum(op, coefficients, lower, upper, np.asarray(f))

    def _chebyshev_sum(self, op: LatticeOperator, coefficients: np.ndarray, lower: float, upper: float,
                       f: np.ndarray) -> np.ndarray:
        """sum_k c_k T_k(A) f with A the operator mapped to [-1, 1]"""
        def mapped(v):
            return (2.0 * op.apply(v) - (lower + upper) * v) / (upper - lower)

        previous = f
        result = coefficients[0] * previous
        if coefficients.size == 1:
            return result
        current = mapped(f)
        result = result + coefficients[1] * current
        for c in coefficients[2:]:
            previous, current = current, 2.0 * mapped(current) - previous
            result = result + c * current
        return result

    def chebyshev_convergence(self, op: LatticeOperator, sd: SpectralDecomposition, g: MultiplierFn,
                              f: np.ndarray, degrees: Iterable[int], tolerance: float = 1e-6) -> ChebyshevConvergence:
        """Max deviation of the Chebyshev path from the oracle for each degree"""
        exact = self.apply_multiplier(sd, g, f)
        degrees = sorted(int(d) for d in degrees)
        errors = []
        reached = None
        for degree in degrees:
            approx = self.apply_multiplier_chebyshev(op, g, degree, f)
            error = float(np.max(np.abs(approx - exact)))
            errors.append(error)
            if reached is None and error <= tolerance:
                reached = degree
        logger.debug(f"Chebyshev convergence for {g.label}: " +
                     ", ".join(f"{d}:{e:.2e}" for d, e in zip(degrees, errors)))
        return ChebyshevConvergence(degrees=degrees, errors=errors, tolerance=tolerance, degree_reached=reached)

    def chebyshev_degree_for(self, op: LatticeOperator, sd: SpectralDecomposition, g: MultiplierFn,
                             f: np.ndarray, tolerance: float = 1e-6, max_degree: int = 1024) -> Optional[int]:
        """Smallest degree in the doubling ladder 4, 8, ... that reaches the tolerance, or None"""
        degrees = [int(d) for d in 2 ** np.arange(2, int(np.log2(max_degree)) + 1)]
        return self.chebyshev_convergence(op, sd, g, f, degrees, tolerance).degree_reached

    def heat_kernel_chebyshev(self, op: LatticeOperator, t: float, block: int = 256) -> np.ndarray:
        """
        e^{-tH} as a dense matrix, column blocks through the Chebyshev recurrence

        The degree follows the Bessel decay of the coefficients of e^{-t lambda}.
        """
        lower, upper = self.chebyshev_interval(op)
        half_width = t * (upper - lower) / 2.0
        degree = int(np.ceil(half_width + 10.0 * np.sqrt(half_width) + 30))
        coefficients = self.chebyshev_coefficients(lambda lam: np.exp(-t * lam), lower, upper, degree + 1)
        size = op.size
        dtype = np.complex128 if op.is_complex else np.float64
        self.monitor.ensure_dense_capacity(size, size, dtype=dtype, copies=2, label="Chebyshev heat kernel")
        result = np.empty((size, size), dtype=dtype)
        for start in range(0, size, block):
            stop = min(start + block, size)
            columns = np.zeros((size, stop - start), dtype=dtype)
            columns[np.arange(start, stop), np.arange(stop - start)] = 1.0
            result[:, start:stop] = self._chebyshev_sum(op, coefficients, lower, upper, columns)
        logger.debug(f"Chebyshev heat kernel at t={t:g}: degree {degree}")
        return result

    # Propagators and kernel norms

    def cosine_propagator(self, sd: SpectralDecomposition, t: float) -> KernelMatrix:
        """Kernel of cos(t sqrt H)"""
        if t < 0:
            raise ValueError("t must be nonnegative")
        g = MultiplierFn.from_function(lambda s: np.cos(t * np.asarray(s)), label=f"cos({t:g}s)",
                                       value_at_zero=1.0)
        return self.multiplier_kernel(sd, g)

    def check_finite_speed(self, sd: SpectralDecomposition, t: float, tolerance: Optional[float] = None,
                           buffer: Optional[float] = None) -> FiniteSpeedReport:
        """
        Relative kernel mass of cos(t sqrt H) outside {|x - y| <= t (1 + buffer)}
        """
        tolerance = settings.FINITE_SPEED_TOLERANCE if tolerance is None else tolerance
        buffer = settings.FINITE_SPEED_BUFFER if buffer is None else buffer
        kernel = self.cosine_propagator(sd, t)
        grid = sd.grid
        magnitude = np.abs(kernel.entries)
        outside = magnitude[grid.squared_distance_matrix() > (t * (1.0 + buffer)) ** 2]
        total_mass = float(np.sum(magnitude)) * grid.cell_volume ** 2
        outside_mass = float(np.sum(outside)) * grid.cell_volume ** 2
        relative = outside_mass / total_mass if total_mass > 0 else 0.0
        return FiniteSpeedReport(t=t, buffer=buffer, outside_mass=outside_mass, total_mass=total_mass,
                                 relative_mass=relative, tolerance=tolerance, passed=relative <= tolerance)

    def weighted_schur_norm(self, kernel: KernelMatrix, weight_profile: Optional[WeightProfile] = None,
                            block: int = 1024) -> float:
        """
        max(sup_x sum_y, sup_y sum_x) of |K(x, y)| w(x - y) h^n

        Args:
            kernel: Kernel with the density convention
            weight_profile: Map from displacement vectors (..., dim) to weights; None means w = 1
            block: Rows processed at a time
        """
        grid = kernel.grid
        size = grid.size
        row_sums = np.empty(size)
        column_sums = np.zeros(size)
        entries = kernel.entries if kernel.density_convention else kernel.entries / grid.cell_volume
        for start in range(0, size, block):
            rows = np.arange(start, min(start + block, size))
            weighted = np.abs(entries[rows])
            if weight_profile is not None:
                displacement = np.stack(list(grid.displacement_components(rows)), axis=-1)
                weighted = weighted * weight_profile(displacement)
            row_sums[rows] = weighted.sum(axis=1)
            column_sums += weighted.sum(axis=0)
        return float(max(row_sums.max(), column_sums.max()) * grid.cell_volume)

    def bracket_profile(self, power: float, scale: float = 1.0) -> WeightProfile:
        """z -> <z / scale>^power"""
        return lambda z: japanese_bracket(np.linalg.norm(z, axis=-1) / scale) ** power

    def kernel_decay_constant(self, sd: SpectralDecomposition, r: float, m: float,
                              derivative: bool = False) -> float:
        """
        sup |psi_r(sqrt H)(x, y)| <(x - y)/r>^m r^n, or with sqrt H psi_r(sqrt H) and r^{n+1}
        """
        if derivative:
            g = MultiplierFn.from_function(lambda s: np.asarray(s) * bump_psi(r * np.asarray(s)),
                                           label=f"s*psi({r:g}s)", value_at_zero=0.0)
        else:
            g = MultiplierFn.smoothed_indicator(1.0 / r)
        kernel = self.multiplier_kernel(sd, g)
        grid = sd.grid
        bracket = japanese_bracket(np.sqrt(grid.squared_distance_matrix()) / r) ** m
        power = grid.dim + (1 if derivative else 0)
        return float(np.max(np.abs(kernel.entries) * bracket) * r ** power)

    def rescaling_identity_check(self, fine: SpectralDecomposition, coarse: SpectralDecomposition,
                                 g: MultiplierFn, j: int = 1) -> RescalingReport:
        """
        Compare g_j(sqrt H)(x, y) with 2^{-jn} G_j(sqrt H_j)(2^{-j}x, 2^{-j}y)

        g_j(s) = phi(2^j s) g(s) and G_j(s) = phi(s) g(2^{-j} s); `coarse` must be the
        dyadic coarsening of `fine`, so coarse node m sits at fine node 2^j m.
        """
        factor = 2 ** j
        fine_grid, coarse_grid = fine.grid, coarse.grid
        if fine_grid.points_per_axis != factor * coarse_grid.points_per_axis:
            raise GridError(f"coarse grid must have N/{factor} points per axis")
        g_j = MultiplierFn.from_function(lambda s: dyadic_phi(factor * np.asarray(s)) * g(s),
                                         label=f"{g.label}_j", value_at_zero=0.0)
        G_j = MultiplierFn.from_function(lambda s: dyadic_phi(np.asarray(s)) * g(np.asarray(s) / factor),
                                         label=f"{g.label}_J", value_at_zero=0.0)
        lhs = self.multiplier_kernel(fine, g_j).entries
        rhs = self.multiplier_kernel(coarse, G_j).entries / factor ** fine_grid.dim
        subsampled = np.all(fine_grid.index_coordinates() % factor == 0, axis=1)
        lhs = lhs[np.ix_(subsampled, subsampled)]
        difference = float(np.max(np.abs(lhs - rhs)))
        reference = float(np.max(np.abs(lhs)))
        return RescalingReport(j=j, fine_points=fine_grid.points_per_axis,
                               coarse_points=coarse_grid.points_per_axis, max_difference=difference,
                               reference_norm=reference,
                               relative_difference=difference / reference if reference > 0 else difference)

    def operator_norm_l2(self, sd: SpectralDecomposition, g: MultiplierFn) -> float:
        """||g(sqrt H)||_{L^2 -> L^2} = max |g(sqrt(lambda_i))|"""
        return float(np.max(np.abs(self.spectral_values(sd, g))))

    def kernel_of(self, sd: SpectralDecomposition, g: Union[MultiplierFn, List[MultiplierFn]]) -> KernelMatrix:
        """Kernel of a product g_1(sqrt H) g_2(sqrt H) ... composed one factor at a time"""
        factors = g if isinstance(g, list) else [g]
        kernel = self.multiplier_kernel(sd, factors[0])
        for factor in factors[1:]:
            kernel = kernel.compose(self.multiplier_kernel(sd, factor))
        return kernel
