"""
Weight Service
Muckenhoupt and reverse Hoelder constants over cube families, weighted norms and A_p factorization
"""
import logging
from collections import defaultdict
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.config.settings import settings
from src.models.lattice import Grid
from src.models.weights import (
    ApReport,
    Cube,
    FactorizationResult,
    MuckenhouptWheedenReport,
    RHReport,
    Weight,
    default_cube_family,
)
from src.utils.exceptions import DimensionMismatchError, ParameterError
from src.utils.helpers import read_table

logger = logging.getLogger(__name__)

Reducer = Callable[..., np.ndarray]


class WeightService:
    """
    Service for weights and the cube-family constants computed from them

    Every constant is a sup over a finite cube family and therefore a lower
    bound of the constant over all cubes.
    """

    def __init__(self, floor: Optional[float] = None):
        self.floor = floor or settings.WEIGHT_FLOOR

    # Cube statistics

    def cube_reduce(self, values: np.ndarray, grid: Grid, family: Sequence[Cube],
                    reducer: Reducer = np.sum) -> np.ndarray:
        """
        reducer(values on Q) for every cube Q of the family, grouped by side

        Args:
            values: Grid function
            grid: Grid the values live on
            family: Cubes inside the grid
            reducer: numpy reduction accepting an axis tuple (np.sum, np.max, np.min)
        """
        array = grid.reshape(values)
        groups: Dict[int, List[int]] = defaultdict(list)
        for i, cube in enumerate(family):
            groups[cube.side].append(i)
        out = np.empty(len(family))
        axes = tuple(range(grid.dim, 2 * grid.dim))
        for side, members in groups.items():
            windows = sliding_window_view(array, (side,) * grid.dim)
            reduced = reducer(windows, axis=axes)
            starts = np.array([family[i].start for i in members])
            out[members] = reduced[tuple(starts.T)]
        return out

    def cube_averages(self, values: np.ndarray, grid: Grid, family: Sequence[Cube]) -> np.ndarray:
        counts = np.array([cube.count for cube in family], dtype=float)
        return self.cube_reduce(values, grid, family, np.sum) / counts

    def cube_maximal(self, f: np.ndarray, grid: Grid, family: Optional[Sequence[Cube]] = None) -> np.ndarray:
        """M f(x) = max over family cubes containing x of the average of |f|"""
        family = family if family is not None else default_cube_family(grid)
        averages = self.cube_averages(np.abs(f), grid, family)
        result = np.zeros(grid.shape)
        for cube, average in zip(family, averages):
            block = result[cube.slices()]
            np.maximum(block, average, out=block)
        return result.ravel()

    # Constants

    def ap_constant(self, w: Weight, p: float) -> ApReport:
        """
        sup over the family of (avg_Q w)(avg_Q w^{1-p'})^{p-1}; p = 1 gives the A_1 constant
        """
        if p < 1:
            raise ValueError(f"A_p needs p >= 1, got {p}")
        if p == 1:
            return self.a1_constant(w)
        family = w.cube_family
        dual_exponent = 1.0 - p / (p - 1.0)
        averages = self.cube_averages(w.values, w.grid, family)
        dual = self.cube_averages(w.values ** dual_exponent, w.grid, family)
        values = averages * dual ** (p - 1.0)
        best = int(np.argmax(values))
        return ApReport(p=p, constant=float(values[best]), argmax_cube=family[best].to_list(),
                        family_size=len(family))

    def a1_constant(self, w: Weight) -> ApReport:
        """sup over the family of avg_Q w / min_Q w"""
        family = w.cube_family
        values = (self.cube_averages(w.values, w.grid, family)
                  / self.cube_reduce(w.values, w.grid, family, np.min))
        best = int(np.argmax(values))
        return ApReport(p=1.0, constant=float(values[best]), argmax_cube=family[best].to_list(),
                        family_size=len(family))

    def rh_constant(self, w: Weight, q: float) -> RHReport:
        """
        Best C in (avg_Q w^q)^{1/q} <= C avg_Q w over the family; q = inf uses max_Q w
        """
        if q <= 1:
            raise ValueError(f"RH_q needs q > 1, got {q}")
        family = w.cube_family
        averages = self.cube_averages(w.values, w.grid, family)
        if np.isinf(q):
            upper = self.cube_reduce(w.values, w.grid, family, np.max)
        else:
            scale = w.sup
            upper = scale * self.cube_averages((w.values / scale) ** q, w.grid, family) ** (1.0 / q)
        values = upper / averages
        best = int(np.argmax(values))
        return RHReport(q=q, constant=float(values[best]), argmax_cube=family[best].to_list(),
                        family_size=len(family))

    def rh_subset_check(self, w: Weight, s: float, trials: int = 500, seed: Optional[int] = None) -> float:
        """
        max over random (Q, E subset Q) of w(E)/w(Q) - ||w||_{RH_{s'}} (|E|/|Q|)^{1/s}

        The pairs always include E = Q and E empty on the first cube drawn.
        """
        if s < 1:
            raise ValueError(f"s must be at least 1, got {s}")
        dual = np.inf if s == 1 else s / (s - 1.0)
        rh = self.rh_constant(w, dual).constant
        rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
        family = w.cube_family
        worst = -np.inf
        for trial in range(trials):
            cube = family[int(rng.integers(len(family)))]
            cube_mask = cube.mask(w.grid)
            if trial == 0:
                subset = cube_mask.copy()
            elif trial == 1:
                subset = np.zeros_like(cube_mask)
            else:
                subset = cube_mask & (rng.random(w.grid.size) < rng.random())
            ratio = w.measure(subset) / w.measure(cube_mask)
            fraction = np.count_nonzero(subset) / cube.count
            worst = max(worst, ratio - rh * fraction ** (1.0 / s))
        return float(worst)

    # Norms and weights

    def weighted_lp_norm(self, f: np.ndarray, w: Optional[Weight], p: float,
                         grid: Optional[Grid] = None) -> Union[float, np.ndarray]:
        """
        (sum |f|^p w h^n)^{1/p}; w = None means w = 1 on `grid`

        A block of columns gives one norm per column.
        """
        if p < 1 or np.isinf(p):
            raise ValueError(f"weighted norms need p in [1, inf), got {p}")
        grid = grid or (w.grid if w is not None else None)
        if grid is None:
            raise ValueError("a grid is needed when no weight is given")
        f = np.abs(np.asarray(f))
        if f.shape[0] != grid.size:
            raise DimensionMismatchError(f"function has {f.shape[0]} values, grid has {grid.size} nodes")
        weights = 1.0
        if w is not None:
            weights = w.values[:, None] if f.ndim > 1 else w.values
        scale = np.max(f, axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        norms = scale * (np.sum((f / scale) ** p * weights, axis=0) * grid.cell_volume) ** (1.0 / p)
        return norms if f.ndim > 1 else float(norms)

    def power_weight(self, alpha: float, grid: Grid) -> Weight:
        """|x|^alpha with |x| floored at h/2 in the origin cell"""
        radius = np.maximum(grid.radius(), grid.spacing / 2.0)
        return Weight(values=radius ** alpha, grid=grid, label=f"|x|^{alpha:g}", floor=self.floor)

    def weight_from_table(self, path: str, grid: Grid) -> Weight:
        """One value per node in row-major order"""
        return Weight(values=read_table(path, expected=grid.size), grid=grid, label=f"table({path})",
                      floor=self.floor)

    # Factorization and interpolation

    def factorize_a1(self, w: Weight, p: float, iterations: int = 30) -> FactorizationResult:
        """
        w = a b^{1-p}: a sums 2^{-k} M^k(w^{1/p}) over the cube maximal operator, b = (a/w)^{1/(p-1)}

        The product identity is exact by construction; what is measured are the
        A_1 constants of both factors. p = 1 returns a = w, b = 1.
        """
        if p < 1:
            raise ValueError(f"factorization needs p >= 1, got {p}")
        family = w.cube_family
        if p == 1:
            one = Weight(values=np.ones(w.grid.size), grid=w.grid, cube_family=family, label="b")
            return FactorizationResult(a=w, b=one, p=p, a1_constant_a=self.a1_constant(w).constant,
                                       a1_constant_b=1.0, residual=0.0, iterations=0)
        term = w.values ** (1.0 / p)
        total = term.copy()
        converged = False
        used = 0
        for k in range(1, iterations + 1):
            term = self.cube_maximal(term, w.grid, family) / 2.0
            total += term
            used = k
            if np.max(term / total) < 1e-12:
                converged = True
                break
        if not converged:
            converged = bool(np.max(term / total) < 1e-6)
            if not converged:
                logger.warning(f"A_1 factorization of {w.label} did not settle after {iterations} iterations")
        a_values = total / np.exp(np.mean(np.log(total)))
        b_values = (a_values / w.values) ** (1.0 / (p - 1.0))
        a = Weight(values=a_values, grid=w.grid, cube_family=family, label="a", floor=w.floor)
        b = Weight(values=b_values, grid=w.grid, cube_family=family, label="b", floor=w.floor)
        residual = float(np.max(np.abs(w.values - a.values * b.values ** (1.0 - p)) / w.values))
        return FactorizationResult(a=a, b=b, p=p, a1_constant_a=self.a1_constant(a).constant,
                                   a1_constant_b=self.a1_constant(b).constant, residual=residual,
                                   iterations=used, converged=converged)

    @staticmethod
    def interpolation_exponent(theta: float, p0: float, p1: float) -> float:
        """p_theta with 1/p_theta = (1 - theta)/p0 + theta/p1"""
        return 1.0 / ((1.0 - theta) / p0 + theta / p1)

    def interpolation_weights(self, a: Weight, b: Weight, p0: float, p1: float,
                              theta: float) -> Tuple[Weight, Weight, Weight]:
        """
        w_i = a b^{1-p_i} and w_theta = w_0^{p_theta(1-theta)/p0} w_1^{p_theta theta/p1} (= a b^{1-p_theta})
        """
        p_theta = self.interpolation_exponent(theta, p0, p1)
        w0 = Weight(values=a.values * b.values ** (1.0 - p0), grid=a.grid, cube_family=a.cube_family, label="w0")
        w1 = Weight(values=a.values * b.values ** (1.0 - p1), grid=a.grid, cube_family=a.cube_family, label="w1")
        combined = (w0.values ** (p_theta * (1.0 - theta) / p0)) * (w1.values ** (p_theta * theta / p1))
        w_theta = Weight(values=combined, grid=a.grid, cube_family=a.cube_family, label="w_theta")
        return w0, w1, w_theta

    def muckenhoupt_wheeden_check(self, w: Weight, p: float, n: Optional[int] = None) -> MuckenhouptWheedenReport:
        """
        Constants of v = w^{1/p}: ||v||_{A_{2-1/p}}, ||v||_{RH_{p*}} and ||v||_{RH_{p**}}

        Raises:
            ParameterError: unless 1 < p < n/2
        """
        n = n or w.grid.dim
        if not 1.0 < p < n / 2.0:
            raise ParameterError(f"p={p} is outside (1, n/2) = (1, {n / 2:g})", "1 < p < n/2")
        v = w.power(1.0 / p, label=f"({w.label})^(1/p)")
        p_star = n * p / (n - p)
        p_star_star = n * p / (n - 2.0 * p)
        return MuckenhouptWheedenReport(
            p=p, n=n,
            v_ap_constant=self.ap_constant(v, 2.0 - 1.0 / p).constant,
            p_star=p_star, p_star_star=p_star_star,
            rh_p_star=self.rh_constant(v, p_star).constant,
            rh_p_star_star=self.rh_constant(v, p_star_star).constant,
        )
