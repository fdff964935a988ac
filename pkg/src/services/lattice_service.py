"""
Lattice Service
Builds finite-difference Schrodinger operators and measures their heat-kernel constants
"""
import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy import fft, signal, sparse, special

from src.config.settings import settings
from src.models.calculus import KernelMatrix, SpectralDecomposition
from src.models.lattice import FieldSpec, Grid, HeatKernelReport, LatticeOperator, OperatorKind
from src.services.calculus_service import FunctionalCalculusService
from src.utils.exceptions import DimensionMismatchError, GridError, ParameterError

logger = logging.getLogger(__name__)


def kato_threshold(n: int) -> float:
    """c_n = pi^{n/2} / Gamma(n/2 - 1), the Kato-norm level V_- must stay below"""
    if n < 3:
        raise ParameterError(f"Kato norms need n >= 3, got n={n}", "n >= 3")
    return float(np.pi ** (n / 2.0) / special.gamma(n / 2.0 - 1.0))


def kato_heat_constant(n: int, kato_vminus: float) -> float:
    """K0 = (2 pi)^{-n/2} / (1 - ||V_-||_K / c_n)"""
    c_n = kato_threshold(n)
    if kato_vminus >= c_n:
        raise ParameterError(f"||V_-||_K = {kato_vminus:.4g} is not below c_n = {c_n:.4g}",
                             "||V_-||_K < c_n")
    return float((2.0 * np.pi) ** (-n / 2.0) / (1.0 - kato_vminus / c_n))


class LatticeService:
    """
    Service for lattice discretizations of (i grad - A)^2 + V
    """

    def __init__(self, calculus: Optional[FunctionalCalculusService] = None, gaussian_d: Optional[float] = None):
        self.calculus = calculus or FunctionalCalculusService()
        self.gaussian_d = gaussian_d or settings.GAUSSIAN_D

    # Operators

    def build_laplacian(self, grid: Grid) -> LatticeOperator:
        """Three-point stencil of -Delta on every axis"""
        return self._assemble(grid, FieldSpec.zero(grid), OperatorKind.LAPLACIAN)

    def build_schrodinger(self, grid: Grid, potential: np.ndarray) -> LatticeOperator:
        """-Delta + V"""
        return self.build_magnetic_schrodinger(grid, FieldSpec(potential=potential))

    def build_magnetic_schrodinger(self, grid: Grid, fields: FieldSpec) -> LatticeOperator:
        """
        (i grad - A)^2 + V with Peierls phases on the nearest-neighbour hops

        Raises:
            DimensionMismatchError: if the fields are not sampled on `grid`
        """
        fields.check_grid(grid)
        if fields.has_magnetic_field:
            kind = OperatorKind.MAGNETIC_SCHRODINGER
        elif np.any(fields.potential != 0.0):
            kind = OperatorKind.SCHRODINGER
        else:
            kind = OperatorKind.LAPLACIAN
        return self._assemble(grid, fields, kind)

    def _assemble(self, grid: Grid, fields: FieldSpec, kind: OperatorKind) -> LatticeOperator:
        n_points = grid.points_per_axis
        if n_points < 3:
            raise GridError(f"the three-point stencil needs N >= 3 per axis, got N={n_points}")
        h2 = grid.spacing ** 2
        index = np.arange(grid.size).reshape(grid.shape)
        magnetic = fields.has_magnetic_field
        rows, cols, values = [], [], []
        for axis in range(grid.dim):
            forward = np.roll(index, -1, axis=axis)
            keep = np.ones(grid.shape, dtype=bool)
            if not grid.periodic:
                edge = [slice(None)] * grid.dim
                edge[axis] = n_points - 1
                keep[tuple(edge)] = False
            source, target = index[keep], forward[keep]
            hop = np.full(source.size, -1.0 / h2, dtype=complex if magnetic else float)
            if magnetic:
                component = fields.vector_potential[axis]
                midpoint = 0.5 * (component[source] + component[target])
                hop = hop * np.exp(1j * grid.spacing * midpoint)
            rows.extend([source, target])
            cols.extend([target, source])
            values.extend([hop, np.conj(hop)])
        diagonal = np.full(grid.size, 2.0 * grid.dim / h2) + fields.potential
        rows.append(index.ravel())
        cols.append(index.ravel())
        values.append(diagonal.astype(complex) if magnetic else diagonal)
        matrix = sparse.coo_matrix(
            (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
            shape=(grid.size, grid.size)
        ).tocsr()

        # Gershgorin discs
        radius = np.asarray(abs(matrix).sum(axis=1)).ravel() - np.abs(diagonal)
        bound = float(np.max(diagonal + radius))
        floor = float(np.min(diagonal - radius))
        logger.debug(f"Built {kind} on {grid.shape} grid (h={grid.spacing:g}, {grid.boundary}): "
                     f"Gershgorin [{floor:.4g}, {bound:.4g}]")
        return LatticeOperator(grid=grid, matrix=matrix, kind=kind, spectral_bound=bound,
                               spectral_floor=floor, fields=fields)

    def dyadic_coarsening(self, op: LatticeOperator, j: int = 1) -> LatticeOperator:
        """
        H_j = 2^{2j} S_{2^j} H S_{2^{-j}} on the box of side L/2^j at the same mesh width

        Coarse node m sits at 2^{-j} times the coordinate of fine node 2^j m, so
        the fields are subsampled and rescaled: V -> 4^j V, A -> 2^j A.
        """
        grid = op.grid
        factor = 2 ** j
        if not grid.periodic:
            raise GridError("dyadic coarsening needs a periodic grid")
        if j < 1 or grid.points_per_axis % factor or grid.points_per_axis // factor < 3:
            raise GridError(f"N={grid.points_per_axis} cannot be coarsened by 2^{j}")
        coarse = Grid(dim=grid.dim, points_per_axis=grid.points_per_axis // factor, spacing=grid.spacing,
                      boundary=grid.boundary, origin_offset=tuple(o / factor for o in grid.origin_offset))
        fields = op.fields or FieldSpec.zero(grid)
        subsample = tuple([slice(None, None, factor)] * grid.dim)
        potential = factor ** 2 * grid.reshape(fields.potential)[subsample].ravel()
        vector = None
        if fields.vector_potential is not None:
            vector = np.stack([factor * grid.reshape(a)[subsample].ravel() for a in fields.vector_potential])
        return self.build_magnetic_schrodinger(coarse, FieldSpec(potential=potential, vector_potential=vector))

    # Heat kernels

    def decompose(self, op: LatticeOperator) -> Optional[SpectralDecomposition]:
        """Eigendecomposition when the operator fits under the dense ceiling, else None"""
        if op.size <= self.calculus.eigen_ceiling:
            return self.calculus.eigendecompose(op)
        return None

    def heat_kernel(self, op: LatticeOperator, t: float,
                    sd: Optional[SpectralDecomposition] = None) -> KernelMatrix:
        """
        Kernel p_t(x, y) of e^{-tH}

        Args:
            op: Operator
            t: Positive time
            sd: Decomposition of `op` to reuse across times
        """
        if t <= 0:
            raise ValueError(f"heat kernels need t > 0, got {t}")
        if sd is None:
            sd = self.decompose(op)
        if sd is not None:
            # raw eigenvalues: negative potentials may give a negative ground state
            matrix = sd.matrix_function(np.exp(-t * sd.eigenvalues))
        else:
            logger.info(f"Operator of size {op.size} is above the dense ceiling, using Chebyshev")
            matrix = self.calculus.heat_kernel_chebyshev(op, t)
        if not op.is_complex:
            matrix = np.real(matrix)
        return KernelMatrix.from_operator_matrix(matrix, op.grid, label=f"p_{t:g}")

    def estimate_gaussian_constant(self, op: LatticeOperator, times: Sequence[float], d: Optional[float] = None,
                                   reference_K0: Optional[float] = None,
                                   sd: Optional[SpectralDecomposition] = None,
                                   block: int = 1024) -> HeatKernelReport:
        """
        sup over sampled (t, x, y) of |p_t(x, y)| t^{n/2} exp(|x - y|^2 / (d t))

        Kernel entries at round-off level relative to the largest one are skipped,
        since the Gaussian factor would otherwise amplify noise.
        """
        d = d or self.gaussian_d
        times = [float(t) for t in times]
        grid = op.grid
        if sd is None:
            sd = self.decompose(op)
        per_time: List[float] = []
        noise_floor = 0.0
        for t in times:
            magnitude = np.abs(self.heat_kernel(op, t, sd=sd).entries)
            floor = 1e3 * np.finfo(float).eps * float(magnitude.max())
            noise_floor = max(noise_floor, floor)
            best = -np.inf
            for start in range(0, grid.size, block):
                rows = np.arange(start, min(start + block, grid.size))
                chunk = magnitude[rows]
                significant = chunk > floor
                if not np.any(significant):
                    continue
                exponent = (np.log(chunk[significant]) + 0.5 * grid.dim * np.log(t)
                            + grid.squared_distance_matrix(rows)[significant] / (d * t))
                best = max(best, float(exponent.max()))
            per_time.append(float(np.exp(best)) if np.isfinite(best) else 0.0)
        K0 = max(per_time)
        violation = max(0.0, K0 - reference_K0) if reference_K0 is not None else 0.0
        logger.info(f"Gaussian constant of {op.kind} on {grid.shape}: K0={K0:.6g} (d={d:g})")
        return HeatKernelReport(times=times, K0_estimate=K0, d_used=d, max_violation=violation,
                                reference_K0=reference_K0, per_time=per_time, noise_floor=noise_floor,
                                grid=grid)

    # Kato class

    def kato_norm(self, potential: np.ndarray, grid: Grid) -> float:
        """
        sup_x sum_y |V(y)| |x - y|^{2-n} h^n

        The y = x cell contributes |V(x)| times the integral of |z|^{2-n} over the
        ball of volume h^n centred at 0.
        """
        n = grid.dim
        if n < 3:
            raise ParameterError(f"Kato norms need n >= 3, got n={n}", "n >= 3")
        values = np.abs(grid.reshape(np.asarray(potential, dtype=float)))
        if not np.any(values):
            return 0.0
        h = grid.spacing
        ball_volume = np.pi ** (n / 2.0) / special.gamma(n / 2.0 + 1.0)
        sphere_area = 2.0 * np.pi ** (n / 2.0) / special.gamma(n / 2.0)
        rho = h / ball_volume ** (1.0 / n)
        singular_cell = sphere_area * rho ** 2 / 2.0

        n_points = grid.points_per_axis
        if grid.periodic:
            offsets = np.arange(n_points)
            offsets = np.minimum(offsets, n_points - offsets)
        else:
            offsets = np.abs(np.arange(-(n_points - 1), n_points))
        mesh = np.meshgrid(*([offsets * h] * n), indexing='ij')
        distance = np.sqrt(sum(m ** 2 for m in mesh))
        with np.errstate(divide='ignore'):
            kernel = distance ** (2.0 - n)
        kernel[distance == 0] = singular_cell / h ** n

        if grid.periodic:
            potential_integral = np.real(fft.ifftn(fft.fftn(values) * fft.fftn(kernel)))
        else:
            potential_integral = signal.fftconvolve(values, kernel, mode='same')
        return float(np.max(potential_integral) * h ** n)

    def potential_for_kato_ratio(self, profile: np.ndarray, grid: Grid, ratio: float) -> np.ndarray:
        """-kappa * |profile| scaled so that ||V_-||_K = ratio * c_n"""
        if not 0.0 <= ratio < 1.0:
            raise ParameterError(f"ratio={ratio} is outside [0, 1)", "||V_-||_K < c_n")
        profile = np.abs(np.asarray(profile, dtype=float))
        norm = self.kato_norm(profile, grid)
        if norm == 0.0:
            return np.zeros_like(profile)
        return -ratio * kato_threshold(grid.dim) / norm * profile

    def check_diamagnetic(self, op_A: LatticeOperator, op_0: LatticeOperator, t: float) -> float:
        """
        max over (x, y) of |e^{-tH_A}(x, y)| - e^{-tH_0}(x, y); nonpositive certifies the inequality
        """
        if op_A.grid != op_0.grid:
            raise DimensionMismatchError("magnetic and non-magnetic operators live on different grids")
        magnetic = np.abs(self.heat_kernel(op_A, t).entries)
        free = np.real(self.heat_kernel(op_0, t).entries)
        return float(np.max(magnetic - free))

    # Difference operators and field sizes

    def gradient(self, f: np.ndarray, grid: Grid) -> np.ndarray:
        """
        Forward differences (f(x + h e_k) - f(x)) / h as a (dim, size) array

        Periodic grids wrap; on Dirichlet grids f is 0 beyond the last node.
        """
        array = grid.reshape(np.asarray(f))
        components = []
        for axis in range(grid.dim):
            if grid.periodic:
                shifted = np.roll(array, -1, axis=axis)
            else:
                shifted = np.zeros_like(array)
                source = [slice(None)] * grid.dim
                target = [slice(None)] * grid.dim
                source[axis], target[axis] = slice(1, None), slice(0, -1)
                shifted[tuple(target)] = array[tuple(source)]
            components.append(((shifted - array) / grid.spacing).ravel())
        return np.stack(components)

    def divergence(self, vector: np.ndarray, grid: Grid) -> np.ndarray:
        """sum_k of the forward difference of component k along axis k"""
        vector = np.asarray(vector)
        if vector.shape != (grid.dim, grid.size):
            raise DimensionMismatchError(f"vector field has shape {vector.shape}, expected {(grid.dim, grid.size)}")
        return sum(self.gradient(vector[k], grid)[k] for k in range(grid.dim))

    def cav_constant(self, fields: FieldSpec, grid: Grid) -> float:
        """
        C(A, V) = || |A|^2 - i div A + V ||_{L^{n/2}} + ||A||_{L^n} + 1

        Raises:
            ParameterError: for n < 3, where L^{n/2} is not a norm
        """
        n = grid.dim
        if n < 3:
            raise ParameterError(f"C(A, V) needs n >= 3, got n={n}", "n >= 3")
        fields.check_grid(grid)
        combined = fields.potential.astype(complex)
        vector_size = 0.0
        if fields.vector_potential is not None:
            A = fields.vector_potential
            magnitude = np.sqrt(np.sum(A ** 2, axis=0))
            combined = combined + magnitude ** 2 - 1j * self.divergence(A, grid)
            vector_size = float(np.sum(magnitude ** n) * grid.cell_volume) ** (1.0 / n)
        potential_size = float(np.sum(np.abs(combined) ** (n / 2.0)) * grid.cell_volume) ** (2.0 / n)
        return potential_size + vector_size + 1.0
