"""
Scenario Service
Builds good-lambda scenarios: the bootstrap construction on |g(sqrt H) f|^nu and a synthetic one
"""
import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.models.calculus import SpectralDecomposition
from src.models.cutoffs import bump_psi
from src.models.decomposition import GoodLambdaScenario
from src.models.lattice import Grid
from src.models.multiplier import MultiplierFn
from src.models.weights import Weight
from src.services.calculus_service import FunctionalCalculusService
from src.services.maximal_service import MaximalService
from src.services.weight_service import WeightService
from src.utils.exceptions import ParameterError

logger = logging.getLogger(__name__)

# Measured constants are inflated by this factor so that the equality cases stay on the right side
SLACK = 1.0 + 1e-9

BallParts = Callable[[int], Tuple[np.ndarray, np.ndarray]]


class ScenarioService:
    """
    Service assembling GoodLambdaScenario objects with their measured constants
    """

    def __init__(self, calculus: Optional[FunctionalCalculusService] = None,
                 maximal: Optional[MaximalService] = None, weights: Optional[WeightService] = None):
        self.calculus = calculus or FunctionalCalculusService()
        self.weights = weights or WeightService()
        self.maximal = maximal or MaximalService(self.weights)

    def family_constants(self, grid: Grid, q: float, trials: Optional[int] = None,
                         seed: Optional[int] = None) -> Tuple[float, float]:
        """(c_1, c_q) of the ball family on `grid`; c_q = 1 for q = infinity"""
        c1 = self.maximal.weak_qq_constant(1.0, grid, trials=trials, seed=seed).constant
        cq = self.maximal.weak_qq_constant(q, grid, trials=trials, seed=seed).constant
        return max(c1, 1.0), max(cq, 1.0)

    def rh_norm(self, weight: Weight, s: float) -> float:
        """||w||_{RH_{s'}} over the weight's cube family"""
        dual = np.inf if s == 1 else s / (s - 1.0)
        return max(1.0, self.weights.rh_constant(weight, dual).constant)

    def _finish(self, scenario: GoodLambdaScenario) -> GoodLambdaScenario:
        MF = self.maximal.maximal_function(scenario.F, scenario.grid)
        scenario = scenario.model_copy(update={"MF": MF})
        audit = self.maximal.audit_scenario(scenario)
        if not audit.passed:
            name, value = audit.worst()
            logger.warning(f"Scenario {scenario.label} violates {name} by {value:.3e}")
        return scenario.model_copy(update={"audit": audit})

    @staticmethod
    def _cached(provider: BallParts) -> BallParts:
        cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

        def parts(k: int) -> Tuple[np.ndarray, np.ndarray]:
            if k not in cache:
                cache[k] = provider(k)
            return cache[k]

        return parts

    def synthetic_scenario(self, F: np.ndarray, grid: Grid, weight: Optional[Weight] = None,
                           q: float = np.inf, s: float = 1.0, radii: Optional[Sequence[int]] = None,
                           label: str = "synthetic", trials: Optional[int] = None,
                           seed: Optional[int] = None) -> GoodLambdaScenario:
        """
        G_B = F 1_B, H_B = 0 and G = MF: the ball conditions hold with a = 1
        """
        F = np.abs(np.asarray(F, dtype=float))
        weight = weight or Weight.uniform(grid)
        radii = list(self.maximal.default_radii(grid) if radii is None else radii)
        zeros = np.zeros(grid.size)
        c1, cq = self.family_constants(grid, q, trials, seed)
        scenario = GoodLambdaScenario(
            label=label, grid=grid, F=F, G=self.maximal.maximal_function(F, grid),
            ball_parts=lambda k: (F, zeros), radii=radii, q=q, a=1.0, s=s, weight=weight,
            rh_norm=self.rh_norm(weight, s), c1=c1, cq=cq,
        )
        return self._finish(scenario)

    def build_spectral_scenario(self, sd: SpectralDecomposition, g: MultiplierFn, f: np.ndarray, nu: float,
                                weight: Optional[Weight] = None, q: float = np.inf, s: float = 1.0,
                                radii: Optional[Sequence[int]] = None, K0: Optional[float] = None,
                                mu: Optional[float] = None, label: Optional[str] = None,
                                trials: Optional[int] = None, seed: Optional[int] = None) -> GoodLambdaScenario:
        """
        F = |g(sqrt H) f|^nu with, on balls of radius r = k h,
        G_B = 2^nu |g(sqrt H)(1 - psi_r(sqrt H)) f|^nu and H_B = 2^nu |g(sqrt H) psi_r(sqrt H) f|^nu

        G = c_G M(|f|^nu). The constants c_G and a are the smallest values for which the
        ball conditions hold over the family; their shapes K0^{2 nu} and
        nu^nu K0^nu (1 + mu + ||g||^2)^nu go to the diagnostics when K0 and mu are given.

        Args:
            sd: Decomposition of H
            g: Multiplier
            f: Input grid function
            nu: Exponent (> 1)
            weight: Weight for the distribution functions; w = 1 when omitted
            q: Exponent of the H_B condition (inf for the sup form)
            s: Reverse Hoelder index, w in RH_{s'}
            radii: Ball radii in cells; all radii up to the covering one when omitted
        """
        if nu <= 1:
            raise ParameterError(f"nu={nu} must exceed 1", "nu > 1")
        grid = sd.grid
        weight = weight or Weight.uniform(grid)
        radii = list(self.maximal.default_radii(grid) if radii is None else radii)
        f = np.asarray(f)
        multiplier_values = self.calculus.spectral_values(sd, g)
        roots = np.sqrt(sd.clamped_eigenvalues())
        roots[sd.kernel_mask()] = 0.0
        F = np.abs(sd.synthesize(multiplier_values, f)) ** nu
        amplitude = 2.0 ** nu

        def provider(k: int) -> Tuple[np.ndarray, np.ndarray]:
            cutoff = bump_psi(k * grid.spacing * roots)
            near = sd.synthesize(multiplier_values * cutoff, f)
            far = sd.synthesize(multiplier_values * (1.0 - cutoff), f)
            return amplitude * np.abs(far) ** nu, amplitude * np.abs(near) ** nu

        ball_parts = self._cached(provider)
        local = self.maximal.maximal_function(np.abs(f) ** nu, grid)
        c_G = self._calibrate_g(grid, ball_parts, radii, local)
        G = c_G * local
        a = self._calibrate_a(grid, ball_parts, radii, F, G, q)
        c1, cq = self.family_constants(grid, q, trials, seed)

        diagnostics = {"c_G": c_G, "a": a, "nu": nu}
        if K0 is not None:
            diagnostics["c_G_shape"] = K0 ** (2.0 * nu)
            if mu is not None:
                diagnostics["a_shape"] = nu ** nu * K0 ** nu * (1.0 + mu + g.sup_norm ** 2) ** nu
        logger.info(f"Bootstrap scenario for {g.label}, nu={nu:g}: c_G={c_G:.4g}, a={a:.4g}")
        scenario = GoodLambdaScenario(
            label=label or f"bootstrap({g.label},nu={nu:g})", grid=grid, F=F, G=G, ball_parts=ball_parts,
            radii=radii, q=q, a=a, s=s, weight=weight, rh_norm=self.rh_norm(weight, s), c1=c1, cq=cq,
            diagnostics=diagnostics,
        )
        return self._finish(scenario)

    def _calibrate_g(self, grid: Grid, ball_parts: BallParts, radii: List[int], local: np.ndarray) -> float:
        """Smallest c with avg_B G_B <= c min_B M(|f|^nu) over the family"""
        count_cache: Dict = {}
        best = 0.0
        for k in radii:
            G_k, _ = ball_parts(k)
            averages = self.maximal.ball_reduce(G_k, grid, k, "sum") / self.maximal.ball_counts(grid, k, count_cache)
            floor = self.maximal.ball_reduce(local, grid, k, "min")
            positive = floor > 0
            if np.any(averages[~positive] > 0):
                raise ParameterError("M(|f|^nu) vanishes on a ball where G_B does not", "f != 0")
            if np.any(positive):
                best = max(best, float(np.max(averages[positive] / floor[positive])))
        return max(best, 1.0) * SLACK

    def _calibrate_a(self, grid: Grid, ball_parts: BallParts, radii: List[int], F: np.ndarray,
                     G: np.ndarray, q: float) -> float:
        """Smallest a >= 1 with ||H_B||_{L^q(B)} <= a (MF(x) + G(y)) |B|^{1/q} over the family"""
        MF = self.maximal.maximal_function(F, grid)
        count_cache: Dict = {}
        best = 1.0
        for k in radii:
            _, H_k = ball_parts(k)
            if np.isinf(q):
                size = self.maximal.ball_reduce(H_k, grid, k, "max")
            else:
                counts = self.maximal.ball_counts(grid, k, count_cache)
                size = (self.maximal.ball_reduce(H_k ** q, grid, k, "sum") / counts) ** (1.0 / q)
            floor = self.maximal.ball_reduce(MF, grid, k, "min") + self.maximal.ball_reduce(G, grid, k, "min")
            positive = floor > 0
            if np.any(size[~positive] > 0):
                raise ParameterError("MF + G vanishes on a ball where H_B does not", "f != 0")
            if np.any(positive):
                best = max(best, float(np.max(size[positive] / floor[positive])))
        return best * SLACK
