"""
Dyadic cutoff functions
The canonical smooth bump psi and the Littlewood-Paley piece phi(s) = psi(s) - psi(2s)
"""
from typing import Dict

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


def smooth_step(x: np.ndarray) -> np.ndarray:
    """exp(-1/x) for x > 0 and 0 otherwise"""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    positive = x > 0
    out[positive] = np.exp(-1.0 / x[positive])
    return out


def bump_psi(s: np.ndarray) -> np.ndarray:
    """
    Even C-infinity bump: 1 on [-1, 1], 0 outside (-2, 2)

    psi(s) = e(2 - |s|) / (e(2 - |s|) + e(|s| - 1)) with e = smooth_step; the
    denominator never vanishes because one of the two arguments is positive.
    """
    a = np.abs(np.asarray(s, dtype=float))
    inner = smooth_step(2.0 - a)
    outer = smooth_step(a - 1.0)
    return inner / (inner + outer)


def dyadic_phi(s: np.ndarray) -> np.ndarray:
    """phi(s) = psi(s) - psi(2s) for s > 0, 0 for s <= 0; supported in [1/2, 2]"""
    s = np.asarray(s, dtype=float)
    out = bump_psi(s) - bump_psi(2.0 * s)
    return np.where(s > 0, out, 0.0)


class DyadicCutoffs(BaseModel):
    """
    The fixed cutoff pair (psi, phi) with the sampling rate used for FFT work
    """
    model_config = ConfigDict(frozen=True)

    sample_rate: int = Field(..., ge=64, description="Samples per unit length in FFT windows")

    def psi(self, s: np.ndarray) -> np.ndarray:
        return bump_psi(s)

    def phi(self, s: np.ndarray) -> np.ndarray:
        return dyadic_phi(s)

    def psi_scaled(self, r: float):
        """s -> psi(r s)"""
        return lambda s: bump_psi(r * np.asarray(s, dtype=float))

    def verification_samples(self, count: int = 10_000) -> np.ndarray:
        """Log-uniform sample points in (0, 8]"""
        return np.geomspace(1e-3, 8.0, count)

    def partition_defects(self, samples: np.ndarray) -> Dict[str, float]:
        """
        Max deviations of the partition identities at the sample points

        Telescoping gives sum_{k>=0} phi(2^k s) = psi(s) and
        sum_{k<0} phi(2^k s) = 1 - psi(s) for s > 0.
        """
        s = np.asarray(samples, dtype=float)
        span = int(np.ceil(np.log2(s.max() / s.min()))) + 4
        low = np.zeros_like(s)
        high = np.zeros_like(s)
        for k in range(0, span + 1):
            low += dyadic_phi(2.0 ** k * s)
        for k in range(1, span + 1):
            high += dyadic_phi(2.0 ** (-k) * s)
        outside = (s < 0.5) | (s > 2.0)
        return {
            "low_identity": float(np.max(np.abs(low - bump_psi(s)))),
            "high_identity": float(np.max(np.abs(high - (1.0 - bump_psi(s))))),
            "full_partition": float(np.max(np.abs(low + high - 1.0))),
            "support": float(np.max(np.abs(dyadic_phi(s[outside])))) if np.any(outside) else 0.0,
        }
