"""
Maximal Function Service
Hardy-Littlewood maximal functions, Calderon-Zygmund and Whitney decompositions,
and the executable good-lambda lemma
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from tqdm import tqdm

from src.config.settings import settings
from src.models.decomposition import (
    Ball,
    CZConstants,
    CZDecomposition,
    GoodLambdaParameters,
    GoodLambdaReport,
    GoodLambdaScenario,
    LambdaRow,
    LocalizationReport,
    MaximalShape,
    RecurrenceReport,
    ScenarioAudit,
    WeakTypeReport,
)
from src.models.lattice import Grid
from src.models.weights import Cube
from src.services.weight_service import WeightService
from src.utils.exceptions import GridError, ParameterError, ScenarioConditionError

logger = logging.getLogger(__name__)

_FILL = {"sum": 0.0, "max": -np.inf, "min": np.inf}
_COMBINE = {"sum": np.add, "max": np.maximum, "min": np.minimum}


class MaximalService:
    """
    Service for maximal operators over the grid ball family and the decompositions built on them

    Balls are centred on nodes with integer radii in cells; distances are the
    index l2 distance, wrapped on periodic grids.
    """

    def __init__(self, weights: Optional[WeightService] = None):
        self.weights = weights or WeightService()

    # Ball reductions

    def ball_reduce(self, values: np.ndarray, grid: Grid, radius: int, mode: str = "sum",
                    cache: Optional[Dict] = None) -> np.ndarray:
        """
        out(x) = sum/max/min of values over the ball of `radius` cells around x

        Args:
            values: Grid function
            grid: Grid
            radius: Radius in cells
            mode: "sum", "max" or "min"
            cache: Partial reductions keyed by (axis, radius^2); reuse only with the same values
        """
        if mode not in _FILL:
            raise ValueError(f"unknown reduction {mode}")
        array = grid.reshape(np.asarray(values, dtype=float))
        cache = {} if cache is None else cache
        return self._reduce(array, int(radius) ** 2, 0, mode, grid.periodic, cache).ravel()

    def ball_counts(self, grid: Grid, radius: int, cache: Optional[Dict] = None) -> np.ndarray:
        return self.ball_reduce(np.ones(grid.size), grid, radius, "sum", cache)

    def _reduce(self, array: np.ndarray, radius_sq: int, axis: int, mode: str, periodic: bool,
                cache: Dict) -> np.ndarray:
        key = (axis, radius_sq)
        if key in cache:
            return cache[key]
        half_width = math.isqrt(radius_sq)
        if axis == array.ndim - 1:
            result = self._window(array, half_width, axis, mode, periodic)
        else:
            result = None
            for delta in self._offsets(array.shape[axis], half_width, periodic):
                inner = self._reduce(array, radius_sq - delta * delta, axis + 1, mode, periodic, cache)
                shifted = self._shift(inner, delta, axis, periodic, _FILL[mode])
                result = shifted if result is None else _COMBINE[mode](result, shifted)
        cache[key] = result
        return result

    @staticmethod
    def _offsets(n_points: int, half_width: int, periodic: bool) -> range:
        """Offsets delta with delta^2 <= r^2, one per residue on periodic axes"""
        if periodic:
            return range(max(-half_width, -(n_points // 2)), min(half_width, n_points - n_points // 2 - 1) + 1)
        reach = min(half_width, n_points - 1)
        return range(-reach, reach + 1)

    @staticmethod
    def _shift(x: np.ndarray, delta: int, axis: int, periodic: bool, fill: float) -> np.ndarray:
        """out[i] = x[i + delta] along `axis`"""
        if delta == 0:
            return x.copy()
        if periodic:
            return np.roll(x, -delta, axis=axis)
        out = np.full_like(x, fill)
        n_points = x.shape[axis]
        target = [slice(None)] * x.ndim
        source = [slice(None)] * x.ndim
        if delta > 0:
            target[axis], source[axis] = slice(0, n_points - delta), slice(delta, None)
        else:
            target[axis], source[axis] = slice(-delta, None), slice(0, n_points + delta)
        out[tuple(target)] = x[tuple(source)]
        return out

    @staticmethod
    def _window(x: np.ndarray, half_width: int, axis: int, mode: str, periodic: bool) -> np.ndarray:
        """Reduce over [i - w, i + w] along the last axis"""
        n_points = x.shape[axis]
        if periodic and half_width >= n_points // 2:
            whole = {"sum": np.sum, "max": np.max, "min": np.min}[mode](x, axis=axis, keepdims=True)
            return np.broadcast_to(whole, x.shape).copy()
        if not periodic:
            half_width = min(half_width, n_points - 1)
        if mode == "sum":
            if periodic:
                extended = np.concatenate([x[..., n_points - half_width:], x, x[..., :half_width]], axis=axis)
            else:
                pad = [(0, 0)] * (x.ndim - 1) + [(half_width, half_width)]
                extended = np.pad(x, pad)
            running = np.concatenate([np.zeros(x.shape[:-1] + (1,)), np.cumsum(extended, axis=axis)], axis=axis)
            return running[..., 2 * half_width + 1:] - running[..., :n_points]
        size = 2 * half_width + 1
        filter_1d = ndimage.maximum_filter1d if mode == "max" else ndimage.minimum_filter1d
        if periodic:
            return filter_1d(x, size=size, axis=axis, mode='wrap')
        return filter_1d(x, size=size, axis=axis, mode='constant', cval=_FILL[mode])

    def default_radii(self, grid: Grid) -> List[int]:
        return list(range(grid.max_index_radius() + 1))

    # Maximal functions

    def maximal_function(self, f: np.ndarray, grid: Grid, shape: MaximalShape = MaximalShape.BALLS,
                         radii: Optional[Sequence[int]] = None,
                         family: Optional[Sequence[Cube]] = None) -> np.ndarray:
        """
        Uncentered maximal function Mf(x) = sup over family members containing x of avg |f|

        For balls: Mf = max_k ballmax_k(A_k) with A_k(c) the average over the ball of radius k at c.
        """
        magnitude = np.abs(np.asarray(f, dtype=float))
        if shape == MaximalShape.CUBES:
            return self.weights.cube_maximal(magnitude, grid, family)
        radii = self.default_radii(grid) if radii is None else radii
        sum_cache: Dict = {}
        count_cache: Dict = {}
        result = np.zeros(grid.size)
        for k in radii:
            averages = (self.ball_reduce(magnitude, grid, k, "sum", sum_cache)
                        / self.ball_counts(grid, k, count_cache))
            np.maximum(result, self.ball_reduce(averages, grid, k, "max"), out=result)
        return result

    def maximal_function_exhaustive(self, f: np.ndarray, grid: Grid,
                                    radii: Optional[Sequence[int]] = None) -> np.ndarray:
        """Enumerate every ball (centre, radius) and raise Mf on its cells; quadratic cost"""
        magnitude = np.abs(np.asarray(f, dtype=float))
        radii = self.default_radii(grid) if radii is None else radii
        result = np.zeros(grid.size)
        for center in grid.index_coordinates():
            distance = grid.index_squared_distance(tuple(center))
            for k in radii:
                mask = distance <= k * k
                average = magnitude[mask].sum() / np.count_nonzero(mask)
                result[mask] = np.maximum(result[mask], average)
        return result

    def weak_ratio(self, f: np.ndarray, Mf: np.ndarray, q: float, grid: Grid) -> float:
        """sup_lambda lambda^q |{Mf > lambda}| / ||f||_q^q, exact over the values of Mf"""
        norm = float(np.sum(np.abs(f) ** q) * grid.cell_volume)
        if norm == 0.0:
            return 0.0
        ascending = np.sort(Mf)
        at_least = Mf.size - np.searchsorted(ascending, ascending, side='left')
        return float(np.max(ascending ** q * at_least) * grid.cell_volume / norm)

    def weak_qq_constant(self, q: float, grid: Grid, trials: Optional[int] = None, seed: Optional[int] = None,
                         shape: MaximalShape = MaximalShape.BALLS) -> WeakTypeReport:
        """
        Empirical weak (q,q) constant of the family over white noise, spikes and ball indicators

        c_inf = 1 by convention.
        """
        trials = trials or settings.DEFAULT_TRIALS
        if np.isinf(q):
            return WeakTypeReport(q=q, constant=1.0, trials=0, shape=shape)
        if q < 1:
            raise ValueError(f"weak (q,q) needs q >= 1, got {q}")
        rng = np.random.default_rng(settings.DEFAULT_SEED if seed is None else seed)
        best = 0.0
        for trial in tqdm(range(trials), desc=f"weak ({q:g},{q:g})", disable=not settings.SHOW_PROGRESS):
            f = self.random_nonnegative(grid, trial, rng)
            best = max(best, self.weak_ratio(f, self.maximal_function(f, grid, shape), q, grid))
        logger.debug(f"Weak ({q:g},{q:g}) constant of {shape} on {grid.shape}: {best:.6g}")
        return WeakTypeReport(q=q, constant=best, trials=trials, shape=shape)

    @staticmethod
    def random_nonnegative(grid: Grid, trial: int, rng: np.random.Generator) -> np.ndarray:
        """White noise, sparse spikes or a ball indicator, cycling with the trial index"""
        kind = trial % 3
        if kind == 0:
            return np.abs(rng.standard_normal(grid.size))
        if kind == 1:
            f = np.zeros(grid.size)
            spikes = rng.integers(grid.size, size=int(rng.integers(1, 4)))
            f[spikes] = rng.random(spikes.size) + 0.1
            return f
        center = tuple(int(c) for c in rng.integers(grid.points_per_axis, size=grid.dim))
        radius = int(rng.integers(0, max(1, grid.points_per_axis // 4)))
        return Ball(center=center, radius=radius).mask(grid).astype(float)

    # Decompositions

    @staticmethod
    def _require_dyadic(grid: Grid):
        if not grid.is_dyadic:
            raise GridError(f"dyadic cubes need N to be a power of two, got N={grid.points_per_axis}")

    def cz_decompose(self, f: np.ndarray, lam: float, grid: Grid) -> CZDecomposition:
        """
        Stopping-time Calderon-Zygmund decomposition at height lambda

        Maximal dyadic cubes with avg |f| > lambda are selected below the root. When
        lambda does not exceed the root average, the root itself is returned
        with a warning.
        """
        if lam <= 0:
            raise ValueError("lambda must be positive")
        self._require_dyadic(grid)
        f = np.asarray(f)
        magnitude = grid.reshape(np.abs(f))
        array = grid.reshape(f)
        root = Cube(start=(0,) * grid.dim, side=grid.points_per_axis)
        degenerate = float(magnitude.mean()) >= lam
        if degenerate:
            logger.warning(f"lambda={lam:g} does not exceed the root average {magnitude.mean():.6g}; "
                           f"returning the whole grid as the only cube")
            cubes = [root]
        else:
            cubes = []
            pending = root.children()
            while pending:
                cube = pending.pop()
                if magnitude[cube.slices()].mean() > lam:
                    cubes.append(cube)
                else:
                    pending.extend(cube.children())
            cubes.sort(key=lambda c: (c.side, c.start))

        good = array.copy()
        bad_parts = []
        bad_mass = 0.0
        for cube in cubes:
            block = array[cube.slices()]
            average = block.mean()
            good[cube.slices()] = average
            bad = (block - average).ravel()
            bad_parts.append(bad)
            bad_mass = max(bad_mass, float(np.abs(bad).sum()) / (lam * cube.count))

        rebuilt = good.copy()
        for cube, bad in zip(cubes, bad_parts):
            rebuilt[cube.slices()] += bad.reshape((cube.side,) * grid.dim)
        l1 = float(np.abs(f).sum() * grid.cell_volume)
        measure = sum(c.volume(grid) for c in cubes)
        constants = CZConstants(
            good_part=float(np.max(np.abs(good))) / lam,
            bad_mass=bad_mass,
            cube_measure=lam * measure / l1 if l1 > 0 else 0.0,
        )
        return CZDecomposition(lam=lam, grid=grid, cubes=cubes, good_part=good.ravel(), bad_parts=bad_parts,
                               constants=constants,
                               reconstruction_residual=float(np.max(np.abs(rebuilt - array))),
                               degenerate=degenerate)

    def whitney_decompose(self, open_set: np.ndarray, grid: Grid) -> List[Cube]:
        """
        Disjoint dyadic cubes covering the set, each with 4Q meeting the complement

        A cube is kept when all its cells lie in the set and, above unit size,
        so do the in-grid cells meeting the open cube 1.5Q.

        Raises:
            GridError: if the set is the whole grid or N is not a power of two
        """
        self._require_dyadic(grid)
        mask = np.asarray(open_set, dtype=bool).ravel()
        if mask.size != grid.size:
            raise GridError(f"mask has {mask.size} cells, grid has {grid.size}")
        if mask.all():
            raise GridError("Whitney decomposition needs a nonempty complement")
        shaped = grid.reshape(mask)
        cubes: List[Cube] = []
        pending = [Cube(start=(0,) * grid.dim, side=grid.points_per_axis)]
        while pending:
            cube = pending.pop()
            block = shaped[cube.slices()]
            if not block.any():
                continue
            if block.all() and (cube.side == 1 or mask[cube.dilated_mask(1.5, grid)].all()):
                cubes.append(cube)
            else:
                pending.extend(cube.children())
        cubes.sort(key=lambda c: c.start)
        return cubes

    # Good-lambda lemma

    def select_parameters(self, a: float, q: float, p: float, s: float, C0: float, rh_norm: float,
                          n: int) -> GoodLambdaParameters:
        """
        K, gamma and C1 of the good-lambda lemma

        K^{q-ps} = 4^s (C0 ||w|| + 2^n)^s a^q, gamma = 4^{-s} (C0 ||w|| + 2^n)^{-s} K^{1-ps},
        C1 = ((8 C0 ||w|| + 2^{n+3}) a^p)^{s/(1-ps/q)}. K is raised to 2^{n+2} a when the
        formula falls short, and equals 2^{n+2} a for q = infinity.

        Raises:
            ParameterError: unless 1 <= p < q/s
        """
        if a < 1 or s < 1 or p < 1:
            raise ParameterError(f"a={a}, s={s}, p={p} must all be at least 1", "a, s, p >= 1")
        if not np.isinf(q) and p >= q / s:
            raise ParameterError(f"p={p} is not below q/s={q / s:g}", "1 <= p < q/s")
        base = C0 * rh_norm + 2.0 ** n
        floor_K = 2.0 ** (n + 2) * a
        widened = False
        if np.isinf(q):
            K = floor_K
            exponent = s
        else:
            K = float(np.exp((s * np.log(4.0) + s * np.log(base) + q * np.log(a)) / (q - p * s)))
            if K < floor_K:
                K, widened = floor_K, True
            exponent = s / (1.0 - p * s / q)
        log_gamma = -s * np.log(4.0 * base) + (1.0 - p * s) * np.log(K)
        log_C1 = exponent * (np.log(8.0 * C0 * rh_norm + 2.0 ** (n + 3)) + p * np.log(a))
        C1 = float(np.exp(log_C1)) if log_C1 < 700 else float("inf")
        if widened:
            logger.info(f"Raised K to 2^(n+2) a = {floor_K:g}")
        return GoodLambdaParameters(n=n, q=q, p=p, s=s, a=a, C0=C0, rh_norm=rh_norm, K=K,
                                    gamma=float(np.exp(log_gamma)), C1=C1, log10_C1=float(log_C1 / np.log(10.0)),
                                    widened=widened)

    def audit_scenario(self, scenario: GoodLambdaScenario, tolerance: float = 1e-12) -> ScenarioAudit:
        """
        Worst violation of the three ball conditions over every ball of the sampled radii

        cond1: F <= G_B + H_B on B; cond2: ||H_B||_{L^q(B)} <= a (MF(x) + G(y)) |B|^{1/q} for x, y in B
        (sup norm for q = inf); cond3: avg_B G_B <= G(y) for y in B.
        """
        grid = scenario.grid
        MF = scenario.MF if scenario.MF is not None else self.maximal_function(scenario.F, grid)
        count_cache: Dict = {}
        worst = [-np.inf, -np.inf, -np.inf]
        for k in scenario.radii:
            G_k, H_k = scenario.ball_parts(k)
            counts = self.ball_counts(grid, k, count_cache)
            g_floor = self.ball_reduce(scenario.G, grid, k, "min")
            lower = self.ball_reduce(MF, grid, k, "min") + g_floor
            worst[0] = max(worst[0], float(np.max(scenario.F - G_k - H_k)))
            if np.isinf(scenario.q):
                h_size = self.ball_reduce(H_k, grid, k, "max")
            else:
                h_size = (self.ball_reduce(np.abs(H_k) ** scenario.q, grid, k, "sum") / counts) ** (1.0 / scenario.q)
            worst[1] = max(worst[1], float(np.max(h_size - scenario.a * lower)))
            g_average = self.ball_reduce(G_k, grid, k, "sum") / counts
            worst[2] = max(worst[2], float(np.max(g_average - g_floor)))
        return ScenarioAudit(cond1_violation=worst[0], cond2_violation=worst[1], cond3_violation=worst[2],
                             balls_checked=grid.size * len(scenario.radii), tolerance=tolerance)

    def _checked_maximal(self, scenario: GoodLambdaScenario) -> np.ndarray:
        """MF after the ball-condition audit; raises ScenarioConditionError on a violation"""
        audit = scenario.audit or self.audit_scenario(scenario)
        if not audit.passed:
            raise ScenarioConditionError(*audit.worst())
        return scenario.MF if scenario.MF is not None else self.maximal_function(scenario.F, scenario.grid)

    def scenario_parameters(self, scenario: GoodLambdaScenario, p: float = 1.0) -> GoodLambdaParameters:
        return self.select_parameters(scenario.a, scenario.q, p, scenario.s, scenario.C0(), scenario.rh_norm,
                                      scenario.n)

    def default_lambda_grid(self, MF: np.ndarray, points: int = 20) -> np.ndarray:
        """points dyadic heights ending at the first power of two above max MF"""
        peak = float(np.max(MF))
        top = int(np.floor(np.log2(peak))) + 1 if peak > 0 else 0
        return 2.0 ** np.arange(top - points + 1, top + 1)

    def good_lambda_check(self, scenario: GoodLambdaScenario, lambda_grid: Optional[Sequence[float]] = None,
                          p: float = 1.0, lambda_points: int = 20) -> GoodLambdaReport:
        """
        Both sides of w{MF > K lam, G <= gamma lam} <= C0 ||w||_{RH_s'} (gamma/K + a^q/K^q)^{1/s} w{MF > lam}

        Also measures ||MF||_{L^p(w)} / ||G||_{L^p(w)} against C1.

        Raises:
            ScenarioConditionError: if the scenario fails a ball condition
            ParameterError: if p is outside [1, q/s)
        """
        MF = self._checked_maximal(scenario)
        params = self.scenario_parameters(scenario, p)
        C0 = scenario.C0()
        weight = scenario.weight
        lambdas = self.default_lambda_grid(MF, lambda_points) if lambda_grid is None else lambda_grid
        factor = C0 * scenario.rh_norm * params.tail_factor()
        rows = []
        for lam in lambdas:
            lam = float(lam)
            lhs = weight.measure((MF > params.K * lam) & (scenario.G <= params.gamma * lam))
            rhs = factor * weight.measure(MF > lam)
            rows.append(LambdaRow(lam=lam, lhs=lhs, rhs=rhs))
        passed = all(row.lhs <= row.rhs for row in rows)

        mf_norm = self.weights.weighted_lp_norm(MF, weight, p)
        g_norm = self.weights.weighted_lp_norm(scenario.G, weight, p)
        if g_norm > 0:
            ratio = mf_norm / g_norm
        else:
            ratio = 0.0 if mf_norm == 0 else float("inf")
        norm_passed = bool(np.log10(ratio) <= params.log10_C1) if ratio > 0 else True
        logger.info(f"Good-lambda on {scenario.label}: {'pass' if passed else 'FAIL'} over {len(rows)} heights, "
                    f"K={params.K:.4g}, gamma={params.gamma:.4g}, norm ratio {ratio:.4g}")
        return GoodLambdaReport(label=scenario.label, parameters=params, rows=rows, passed=passed, C0=C0,
                                norm_ratio=ratio, norm_ratio_passed=norm_passed)

    def recurrence_check(self, scenario: GoodLambdaScenario, p: float = 1.0, quadrature: str = "exact",
                         subbands: int = 32, tolerance: float = 1e-10) -> RecurrenceReport:
        """
        c_j = int_{K^j}^{K^{j+1}} p lam^{p-1} w{MF > lam}, d_j likewise for MG on [gamma K^{j-1}, gamma K^j]

        Checks c_j <= c_{j-1}/2 + (K/gamma)^p d_j, sum c_j <= 2 (K/gamma)^p sum d_j and, for j < 0,
        c_j against the weak (1,1) envelope ||w||_inf c_1 ||F||_1 int p lam^{p-2}.
        """
        if quadrature not in ("exact", "midpoint"):
            raise ValueError(f"unknown quadrature {quadrature}")
        MF = self._checked_maximal(scenario)
        grid = scenario.grid
        MG = self.maximal_function(scenario.G, grid)
        params = self.scenario_parameters(scenario, p)
        K, gamma = params.K, params.gamma
        weight = scenario.weight
        mass = weight.values * grid.cell_volume
        log_K = np.log(K)

        def log_band(values: np.ndarray, lowest: bool) -> float:
            positive = values[values > 0]
            if positive.size == 0:
                return 0.0
            return float(np.log(positive.min() if lowest else positive.max()) / log_K)

        j_max = int(np.ceil(max(log_band(MF, False), log_band(MG / gamma, False))))
        j_min = int(np.floor(min(log_band(MF, True), log_band(MG / gamma, True) + 1.0)))
        js = np.arange(j_min - 1, j_max + 1)

        def band(values: np.ndarray, lower: float, upper: float) -> float:
            if quadrature == "exact":
                return float(np.sum(mass * np.maximum(np.minimum(values, upper) ** p - lower ** p, 0.0)))
            edges = np.linspace(lower, upper, subbands + 1)
            mids = 0.5 * (edges[1:] + edges[:-1])
            measure = np.array([np.sum(mass[values > m]) for m in mids])
            return float(np.sum(p * mids ** (p - 1) * measure) * (edges[1] - edges[0]))

        c = [band(MF, K ** j, K ** (j + 1)) for j in js]
        d = [band(MG, gamma * K ** (j - 1), gamma * K ** j) for j in js]
        step_factor = (K / gamma) ** p
        sum_c = float(np.sum(mass * MF ** p))
        sum_d = float(np.sum(mass * MG ** p))
        scale = max(sum_c, np.finfo(float).tiny)
        excess = [(c[i] - 0.5 * c[i - 1] - step_factor * d[i]) / scale for i in range(1, len(js))]
        worst_step = float(max(excess)) if excess else 0.0
        sum_bound = 2.0 * step_factor * sum_d

        c1 = max(scenario.c1, self.weak_ratio(scenario.F, MF, 1.0, grid))
        envelope_scale = weight.sup * c1 * float(np.sum(scenario.F) * grid.cell_volume)
        envelope_excess = -np.inf
        for j, c_j in zip(js, c):
            if j >= 0:
                continue
            lower, upper = K ** j, K ** (j + 1)
            if p == 1:
                integral = np.log(upper / lower)
            else:
                integral = p / (p - 1.0) * (upper ** (p - 1.0) - lower ** (p - 1.0))
            envelope_excess = max(envelope_excess, (c_j - envelope_scale * integral) / scale)
        envelope_excess = float(envelope_excess) if np.isfinite(envelope_excess) else 0.0

        slack = tolerance if quadrature == "exact" else 1e-2
        passed = (worst_step <= slack and sum_c <= sum_bound * (1.0 + tolerance) + np.finfo(float).tiny
                  and envelope_excess <= slack)
        return RecurrenceReport(p=p, K=K, gamma=gamma, j_range=(int(js[0]), int(js[-1])), c=c, d=d,
                                worst_step_excess=worst_step, sum_c=sum_c, sum_d=sum_d, sum_bound=sum_bound,
                                envelope_excess=envelope_excess, quadrature=quadrature, passed=passed)

    def localization_check(self, scenario: GoodLambdaScenario, lam: float, K: Optional[float] = None,
                           factor: int = 16) -> LocalizationReport:
        """
        |{MF > K lam} n Q_j| <= |{M(F 1_{B_j}) > K lam / 2}| for every Whitney cube Q_j of {MF > lam}

        B_j is the ball of radius `factor` times the side of Q_j.
        """
        grid = scenario.grid
        MF = self._checked_maximal(scenario)
        K = K or self.scenario_parameters(scenario).K
        level_set = MF > lam
        if not level_set.any() or level_set.all():
            return LocalizationReport(lam=lam, K=K, cubes_checked=0, worst_excess=0.0, skipped=True, passed=True)
        cubes = self.whitney_decompose(level_set, grid)
        high = MF > K * lam
        worst = -np.inf
        for cube in cubes:
            ball_mask = Ball.around_cube(cube, factor).mask(grid)
            lhs = np.count_nonzero(high & cube.mask(grid)) * grid.cell_volume
            local = self.maximal_function(np.where(ball_mask, scenario.F, 0.0), grid)
            rhs = np.count_nonzero(local > K * lam / 2.0) * grid.cell_volume
            worst = max(worst, lhs - rhs)
        return LocalizationReport(lam=lam, K=K, cubes_checked=len(cubes), worst_excess=float(worst),
                                  passed=worst <= 0.0)
