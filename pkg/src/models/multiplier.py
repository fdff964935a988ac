"""
Spectral multipliers
Scalar functions g on [0, infinity) applied to sqrt(H)
"""
from enum import Enum
from typing import Any, Callable, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.cutoffs import bump_psi

DEFAULT_SAMPLES = np.concatenate([[0.0], np.geomspace(1e-4, 1e4, 4097)])


class MultiplierKind(str, Enum):
    """Built-in multiplier families"""
    CONSTANT = "constant"
    HEAT = "heat"
    IMAGINARY_POWER = "imaginary_power"
    FRACTIONAL = "fractional"
    INDICATOR_BAND = "indicator_band"
    SMOOTHED_INDICATOR = "smoothed_indicator"
    CUSTOM_TABLE = "custom_table"
    CUSTOM = "custom"

    def __str__(self):
        return self.value


class MultiplierFn(BaseModel):
    """
    A multiplier g with its sup norm estimated on a declared sample set

    `value_at_zero` is what g(sqrt(0)) means for zero eigenvalues. When it is
    not declared, g(0) is used if finite, otherwise the value at the smallest
    positive sample.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    label: str = Field(..., description="Identifier used in reports")
    kind: MultiplierKind = Field(default=MultiplierKind.CUSTOM)
    evaluator: Callable[[np.ndarray], Any] = Field(..., description="Vectorized map s -> g(s) for s > 0")
    value_at_zero: Any = Field(default=0j, description="Value used for s = 0")
    sample_points: np.ndarray = Field(default_factory=lambda: DEFAULT_SAMPLES.copy())
    sup_norm: float = Field(default=0.0, ge=0.0)
    real_valued: bool = Field(default=True)
    params: Dict[str, float] = Field(default_factory=dict)
    known_mu: Dict[str, float] = Field(default_factory=dict, description="Cache of measured mu norms")

    @model_validator(mode='before')
    @classmethod
    def measure_samples(cls, data: Any) -> Any:
        """Resolve the value at 0, the sup norm and real-valuedness from the samples"""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        evaluator = data['evaluator']
        samples = np.asarray(data.get('sample_points', DEFAULT_SAMPLES), dtype=float)
        positive = samples[samples > 0]
        with np.errstate(all='ignore'):
            values = np.asarray(evaluator(positive), dtype=complex)
        if not np.all(np.isfinite(values)):
            raise ValueError(f"multiplier {data.get('label')} is not finite on its sample set")
        if data.get('value_at_zero') is None:
            with np.errstate(all='ignore'):
                at_zero = complex(np.asarray(evaluator(np.array([0.0])), dtype=complex)[0])
            if not np.isfinite(at_zero):
                at_zero = complex(values[np.argmin(positive)])
            data['value_at_zero'] = at_zero
        zero_value = complex(data['value_at_zero'])
        data["value_at_zero"] = zero_value
        data['sample_points'] = samples
        data['sup_norm'] = float(max(np.max(np.abs(values), initial=0.0), abs(zero_value)))
        scale = max(data['sup_norm'], 1.0)
        data['real_valued'] = bool(
            np.max(np.abs(values.imag), initial=0.0) <= 1e-14 * scale and abs(zero_value.imag) <= 1e-14 * scale
        )
        return data

    def __call__(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape, dtype=complex)
        positive = s > 0
        with np.errstate(all='ignore'):
            out[positive] = np.asarray(self.evaluator(s[positive]), dtype=complex)
        out[~positive] = self.value_at_zero
        return out.real if self.real_valued else out

    # Algebra

    def times(self, other: 'MultiplierFn', label: Optional[str] = None) -> 'MultiplierFn':
        return MultiplierFn(
            label=label or f"({self.label})*({other.label})",
            evaluator=lambda s: self(s) * other(s),
            value_at_zero=self.value_at_zero * other.value_at_zero,
            sample_points=self.sample_points,
        )

    def dilate(self, lam: float) -> 'MultiplierFn':
        """S_lam g: s -> g(lam s)"""
        return MultiplierFn(
            label=f"{self.label}(x{lam:g})",
            kind=self.kind,
            evaluator=lambda s: self(lam * np.asarray(s)),
            value_at_zero=self.value_at_zero,
            sample_points=self.sample_points,
            params=self.params,
        )

    # Built-ins

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], Any], label: str,
                      value_at_zero: Optional[complex] = None) -> 'MultiplierFn':
        return cls(label=label, evaluator=func, value_at_zero=value_at_zero)

    @classmethod
    def constant(cls, c: complex = 1.0) -> 'MultiplierFn':
        return cls(label=f"constant({c})", kind=MultiplierKind.CONSTANT,
                   evaluator=lambda s: np.full(np.shape(s), c, dtype=complex),
                   value_at_zero=c, params={"c": float(np.real(c))})

    @classmethod
    def heat(cls, t: float = 1.0) -> 'MultiplierFn':
        """e^{-t s^2}, so that g(sqrt(H)) = e^{-tH}"""
        return cls(label=f"heat(t={t:g})", kind=MultiplierKind.HEAT,
                   evaluator=lambda s: np.exp(-t * np.asarray(s) ** 2),
                   value_at_zero=1.0, params={"t": t})

    @classmethod
    def imaginary_power(cls, y: float) -> 'MultiplierFn':
        """s^{2iy}, with 0^{2iy} := 0"""
        return cls(label=f"imaginary_power(y={y:g})", kind=MultiplierKind.IMAGINARY_POWER,
                   evaluator=lambda s: np.exp(2j * y * np.log(np.asarray(s))),
                   value_at_zero=0.0 if y != 0 else 1.0, params={"y": y})

    @classmethod
    def fractional(cls, theta: float) -> 'MultiplierFn':
        """s^{2 theta}, so that g(sqrt(H)) = H^theta"""
        return cls(label=f"fractional(theta={theta:g})", kind=MultiplierKind.FRACTIONAL,
                   evaluator=lambda s: np.asarray(s) ** (2.0 * theta),
                   value_at_zero=0.0 if theta > 0 else 1.0, params={"theta": theta})

    @classmethod
    def indicator_band(cls, lower: float, upper: float) -> 'MultiplierFn':
        """Sharp indicator of [lower, upper]"""
        return cls(label=f"indicator_band([{lower:g},{upper:g}])", kind=MultiplierKind.INDICATOR_BAND,
                   evaluator=lambda s: ((np.asarray(s) >= lower) & (np.asarray(s) <= upper)).astype(float),
                   value_at_zero=1.0 if lower <= 0 else 0.0,
                   params={"lower": lower, "upper": upper})

    @classmethod
    def smoothed_indicator(cls, radius: float = 1.0) -> 'MultiplierFn':
        """psi(s / radius): 1 below radius, 0 beyond twice the radius"""
        return cls(label=f"smoothed_indicator(R={radius:g})", kind=MultiplierKind.SMOOTHED_INDICATOR,
                   evaluator=lambda s: bump_psi(np.asarray(s) / radius),
                   value_at_zero=1.0, params={"radius": radius})

    @classmethod
    def custom_table(cls, s: np.ndarray, real: np.ndarray, imag: Optional[np.ndarray] = None,
                     label: str = "custom_table") -> 'MultiplierFn':
        """Linear interpolation of (s, Re g, Im g) triples, constant beyond the ends"""
        s = np.asarray(s, dtype=float)
        order = np.argsort(s)
        s = s[order]
        real = np.asarray(real, dtype=float)[order]
        imag = np.zeros_like(real) if imag is None else np.asarray(imag, dtype=float)[order]

        def evaluate(x):
            x = np.asarray(x, dtype=float)
            return np.interp(x, s, real) + 1j * np.interp(x, s, imag)

        return cls(label=label, kind=MultiplierKind.CUSTOM_TABLE, evaluator=evaluate,
                   value_at_zero=complex(np.interp(0.0, s, real), np.interp(0.0, s, imag)))

    def to_summary_dict(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "kind": self.kind.value,
            "sup_norm": self.sup_norm,
            "params": self.params,
            "known_mu": self.known_mu,
        }
