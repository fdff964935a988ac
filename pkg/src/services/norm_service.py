"""
Multiplier Norm Service
Dyadic cutoffs, FFT evaluation of the mu norms and the predicted shape constants
"""
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from src.config.settings import settings
from src.models.cutoffs import DyadicCutoffs
from src.models.multiplier import MultiplierFn
from src.models.norms import MuEstimate, PredictedConstants, SobolevMajorant
from src.utils.exceptions import CutoffIdentityError
from src.utils.helpers import fit_growth_exponent, japanese_bracket

logger = logging.getLogger(__name__)

PARTITION_TOLERANCE = 1e-10


class MultiplierNormService:
    """
    Service for the scale-invariant multiplier norms mu_a and mu'_a

    Fourier convention: F h(xi) = int h(s) e^{-i s xi} ds, evaluated by FFT on
    the window [0, FFT_WINDOW] with zero padding.
    """

    def __init__(self, sample_rate: Optional[int] = None, octaves: Optional[int] = None,
                 points_per_octave: Optional[int] = None):
        self.sample_rate = sample_rate or settings.CUTOFF_SAMPLE_RATE
        self.octaves = octaves or settings.MU_OCTAVES
        self.points_per_octave = points_per_octave or settings.MU_POINTS_PER_OCTAVE
        self.window = settings.FFT_WINDOW
        self.padding = settings.FFT_PADDING
        self._cutoffs: Optional[DyadicCutoffs] = None

    def make_cutoffs(self, sample_rate: Optional[int] = None) -> DyadicCutoffs:
        """
        Build (psi, phi) and run the partition self-test

        Raises:
            CutoffIdentityError: if a partition identity or the support fails at 1e-10
        """
        cutoffs = DyadicCutoffs(sample_rate=sample_rate or self.sample_rate)
        defects = cutoffs.partition_defects(cutoffs.verification_samples())
        defects["psi_at_zero"] = abs(float(cutoffs.psi(np.array([0.0]))[0]) - 1.0)
        defects["phi_at_one"] = abs(float(cutoffs.phi(np.array([1.0]))[0]) - 1.0)
        failed = {name: value for name, value in defects.items() if value > PARTITION_TOLERANCE}
        if failed:
            raise CutoffIdentityError(f"Cutoff self-test failed: {failed}")
        logger.debug(f"Cutoff self-test passed: {defects}")
        return cutoffs

    @property
    def cutoffs(self) -> DyadicCutoffs:
        if self._cutoffs is None:
            self._cutoffs = self.make_cutoffs()
        return self._cutoffs

    def default_lambda_grid(self, octaves: Optional[int] = None) -> np.ndarray:
        """2^{k/points_per_octave} for |k| <= octaves * points_per_octave"""
        octaves = octaves or self.octaves
        k = np.arange(-octaves * self.points_per_octave, octaves * self.points_per_octave + 1)
        return 2.0 ** (k / self.points_per_octave)

    # Transforms

    def _sample_axis(self, cutoffs: DyadicCutoffs) -> Tuple[np.ndarray, float]:
        count = int(cutoffs.sample_rate * self.window)
        ds = self.window / count
        return np.arange(count) * ds, ds

    def _pieces(self, g: MultiplierFn, lambdas: np.ndarray, primed: bool,
                cutoffs: DyadicCutoffs) -> Tuple[np.ndarray, float]:
        """Rows phi(s) g(lambda s) (times s when primed) on the sample axis"""
        s, ds = self._sample_axis(cutoffs)
        phi = cutoffs.phi(s)
        if primed:
            phi = s * phi
        support = phi != 0.0
        pieces = np.zeros((lambdas.size, s.size), dtype=complex)
        for i, lam in enumerate(lambdas):
            values = np.asarray(g(lam * s[support]), dtype=complex)
            if not np.all(np.isfinite(values)):
                raise ValueError(f"multiplier {g.label} is not finite on [{lam / 2:g}, {2 * lam:g}]")
            pieces[i, support] = phi[support] * values
        return pieces, ds

    def _transform(self, pieces: np.ndarray, ds: float) -> Tuple[np.ndarray, np.ndarray, float]:
        """Continuum-normalized transforms of each row with the frequency axis and its step"""
        length = pieces.shape[1] * self.padding
        transform = ds * np.fft.fft(pieces, n=length, axis=1)
        xi = 2.0 * np.pi * np.fft.fftfreq(length, d=ds)
        d_xi = 2.0 * np.pi / (length * ds)
        return transform, xi, d_xi

    def _weighted_l1(self, g: MultiplierFn, a: float, lambdas: np.ndarray, primed: bool,
                     cutoffs: DyadicCutoffs) -> np.ndarray:
        pieces, ds = self._pieces(g, lambdas, primed, cutoffs)
        transform, xi, d_xi = self._transform(pieces, ds)
        return np.sum(japanese_bracket(xi)[None, :] ** a * np.abs(transform), axis=1) * d_xi

    # Norms

    def mu_norm(self, g: MultiplierFn, a: float, cutoffs: Optional[DyadicCutoffs] = None,
                lambda_grid: Optional[Sequence[float]] = None, primed: bool = False,
                widen: bool = True) -> MuEstimate:
        """
        sup_lambda ||<xi>^a F[phi S_lambda g]||_{L^1}

        Args:
            g: Multiplier
            a: Smoothness order (>= 0)
            cutoffs: Cutoff pair; the self-tested default when omitted
            lambda_grid: Scaling parameters; geometric 2^{+-octaves} when omitted
            primed: Use s phi(s) in place of phi (the mu' norm)
            widen: Extend a default grid by four octaves each side when the sup sits on its edge
        """
        if a < 0:
            raise ValueError(f"smoothness order must be nonnegative, got {a}")
        cutoffs = cutoffs or self.cutoffs
        default_grid = lambda_grid is None
        lambdas = self.default_lambda_grid() if default_grid else np.asarray(lambda_grid, dtype=float)
        values = self._weighted_l1(g, a, lambdas, primed, cutoffs)
        estimate = MuEstimate(label=g.label, a=a, lambda_grid=lambdas.tolist(), per_lambda=values.tolist(),
                              primed=primed)
        if estimate.edge_maximum and default_grid and widen:
            wider = self.default_lambda_grid(self.octaves + 4)
            values = self._weighted_l1(g, a, wider, primed, cutoffs)
            estimate = MuEstimate(label=g.label, a=a, lambda_grid=wider.tolist(), per_lambda=values.tolist(),
                                  primed=primed)
            if estimate.edge_maximum and not np.isclose(values[0], values[-1], rtol=1e-6):
                logger.warning(f"mu_{a:g}({g.label}) still peaks at the edge of the widened lambda grid")
        return estimate

    def mu_prime_norm(self, g: MultiplierFn, a: float, cutoffs: Optional[DyadicCutoffs] = None,
                      lambda_grid: Optional[Sequence[float]] = None) -> MuEstimate:
        """sup_lambda ||<xi>^a F[s phi(s) S_lambda g]||_{L^1}"""
        return self.mu_norm(g, a, cutoffs=cutoffs, lambda_grid=lambda_grid, primed=True)

    def sobolev_majorant(self, g: MultiplierFn, a: float, epsilon: float,
                         cutoffs: Optional[DyadicCutoffs] = None,
                         t_grid: Optional[Sequence[float]] = None) -> SobolevMajorant:
        """
        sup_t ||phi S_t g||_{H^{a+1/2+eps}} with ||h||^2_{H^r} = (2 pi)^{-1} int <xi>^{2r} |F h|^2
        """
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        cutoffs = cutoffs or self.cutoffs
        ts = self.default_lambda_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
        pieces, ds = self._pieces(g, ts, False, cutoffs)
        transform, xi, d_xi = self._transform(pieces, ds)
        order = a + 0.5 + epsilon
        squared = np.sum(japanese_bracket(xi)[None, :] ** (2 * order) * np.abs(transform) ** 2, axis=1)
        norms = np.sqrt(squared * d_xi / (2.0 * np.pi))
        return SobolevMajorant(label=g.label, a=a, epsilon=epsilon, value=float(np.max(norms)),
                               per_t=[(float(t), float(v)) for t, v in zip(ts, norms)])

    @staticmethod
    def majorant_constant(epsilon: float) -> float:
        """c(eps) with mu_a(g) <= c(eps) * majorant, from Cauchy-Schwarz against <xi>^{-1-2 eps}"""
        integral = np.sqrt(np.pi) * special.gamma(epsilon) / special.gamma(0.5 + epsilon)
        return float(np.sqrt(2.0 * np.pi * integral))

    def dyadic_piece_bound(self, g: MultiplierFn, a: float, j: int, n: int,
                           cutoffs: Optional[DyadicCutoffs] = None) -> float:
        """||<xi>^{a+n/2} F[phi S_{2^{-j}} g]||_{L^1}, the right side of the per-piece kernel bounds"""
        cutoffs = cutoffs or self.cutoffs
        return float(self._weighted_l1(g, a + n / 2.0, np.array([2.0 ** (-j)]), False, cutoffs)[0])

    def imaginary_power_growth(self, a: float, y_values: Iterable[float],
                               cutoffs: Optional[DyadicCutoffs] = None) -> Tuple[float, float, List[float]]:
        """
        Fit mu_a(s^{2iy}) ~ C (1 + |y|)^beta

        Returns:
            Tuple of (beta, C, measured values)
        """
        ys = [float(y) for y in y_values]
        # |F[phi S_lambda s^{2iy}]| does not depend on lambda
        values = [self.mu_norm(MultiplierFn.imaginary_power(y), a, cutoffs=cutoffs, lambda_grid=[1.0]).value
                  for y in ys]
        beta, constant = fit_growth_exponent([1.0 + abs(y) for y in ys], values)
        return beta, constant, values

    # Predicted shapes

    def predicted_constants(self, K0: float, mu: float, sup_norm: float, n: int, sigma: float,
                            p: Optional[float] = None, q: Optional[float] = None,
                            mu_prime: Optional[float] = None) -> PredictedConstants:
        """
        Structural constants of the weak (1,1), L^p and weighted L^q(w) estimates with c(.) = 1

        Args:
            K0: Gaussian constant
            mu: mu_sigma(g)
            sup_norm: ||g||_inf
            n: Dimension
            sigma: Smoothness order
            p: Lebesgue exponent for the L^p and A_p shapes
            q: Exponent of the weighted estimate
            mu_prime: mu'_sigma(g) for the gradient family; defaults to mu
        """
        core = 1.0 + mu + sup_norm ** 2
        weak_11 = K0 ** 4 * core
        primed_core = 1.0 + (mu if mu_prime is None else mu_prime) + sup_norm ** 2
        values = {
            "K0": K0, "mu": mu, "sup_norm": sup_norm, "n": n, "sigma": sigma, "p": p, "q": q,
            "weak_11": weak_11,
            "primed_weak_11": K0 ** 4 * primed_core,
            "sigma_valid": sigma > n / 2.0,
        }
        if p is not None:
            lp_factor = 6.0 * (p + 1.0 / (p - 1.0))
            values["lp_factor"] = lp_factor
            values["lp_bound"] = lp_factor * weak_11
            values["primed_lp_bound"] = values["primed_weak_11"] / (p - 1.0)
            if q is not None:
                values["weighted_bound"] = K0 ** (1.0 + 2.0 * p ** 2) * core * q
                values["weighted_valid"] = sigma > 0 and q > p * max(1.0, n / sigma)
        if not values["sigma_valid"]:
            logger.warning(f"sigma={sigma:g} is not above n/2={n / 2:g}: the weak (1,1) shape is vacuous")
        return PredictedConstants(**values)
