"""
Multiplier norm models
Measured mu norms and the structural constants they feed
"""
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, model_validator


class MuEstimate(BaseModel):
    """
    sup over a lambda grid of ||<xi>^a F[phi S_lambda g]||_1 (or with s*phi when primed)
    """
    label: str = Field(..., description="Multiplier label")
    a: float = Field(..., ge=0.0, description="Smoothness order")
    lambda_grid: List[float] = Field(..., min_length=1)
    per_lambda: List[float] = Field(..., min_length=1)
    value: float = Field(default=0.0, ge=0.0)
    primed: bool = Field(default=False)
    argmax_lambda: Optional[float] = None
    edge_maximum: bool = Field(default=False, description="Sup attained at the end of the lambda grid")

    @model_validator(mode='before')
    @classmethod
    def take_supremum(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get('per_lambda'):
            data = dict(data)
            values = list(data['per_lambda'])
            index = max(range(len(values)), key=values.__getitem__)
            data['value'] = float(values[index])
            data['argmax_lambda'] = float(data['lambda_grid'][index])
            data['edge_maximum'] = index in (0, len(values) - 1) and len(values) > 2
        return data

    @model_validator(mode='after')
    def check_lengths(self) -> 'MuEstimate':
        if len(self.lambda_grid) != len(self.per_lambda):
            raise ValueError("lambda_grid and per_lambda differ in length")
        return self

    def to_json_record(self) -> Dict[str, Any]:
        """{label, a, primed, value, per_lambda: [[lambda, v]]}"""
        return {
            "label": self.label,
            "a": self.a,
            "primed": self.primed,
            "value": self.value,
            "per_lambda": [[lam, v] for lam, v in zip(self.lambda_grid, self.per_lambda)],
        }


class SobolevMajorant(BaseModel):
    """sup_t ||phi S_t g||_{H^{a+1/2+eps}} next to the mu norm it dominates"""
    label: str
    a: float = Field(..., ge=0.0)
    epsilon: float = Field(..., gt=0.0)
    value: float = Field(..., ge=0.0)
    per_t: List[Tuple[float, float]] = Field(default_factory=list)


class PredictedConstants(BaseModel):
    """
    Shape constants of the multiplier estimates with every c(.) factor set to 1
    """
    K0: float = Field(..., ge=0.0)
    mu: float = Field(..., ge=0.0)
    sup_norm: float = Field(..., ge=0.0)
    n: int = Field(..., ge=1)
    sigma: float = Field(..., ge=0.0)
    p: Optional[float] = None
    q: Optional[float] = None

    weak_11: float = Field(..., description="K0^4 (1 + mu + ||g||^2)")
    lp_factor: Optional[float] = Field(None, description="6 (p + 1/(p-1))")
    lp_bound: Optional[float] = Field(None, description="lp_factor * weak_11")
    weighted_bound: Optional[float] = Field(None, description="K0^{1+2p^2} (1 + mu + ||g||^2) q")
    primed_weak_11: float = Field(..., description="K0^4 (1 + mu' + ||g||^2), gradient family")
    primed_lp_bound: Optional[float] = Field(None, description="c(q) primed_weak_11 / (p - 1) with c(q) = 1")

    sigma_valid: bool = Field(..., description="sigma > n/2")
    weighted_valid: Optional[bool] = Field(None, description="q > p max{1, n/sigma}")
    shape_only: bool = Field(default=True, description="Unspecified c(.) factors were set to 1")

    def to_summary_dict(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)
