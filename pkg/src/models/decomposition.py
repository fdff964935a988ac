"""
Maximal-function and good-lambda data models
Balls, Calderon-Zygmund decompositions and the reports of the good-lambda audit
"""
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.models.lattice import Grid
from src.models.weights import Cube, Weight


class MaximalShape(str, Enum):
    """Averaging family of the maximal operator"""
    BALLS = "balls"
    CUBES = "cubes"

    def __str__(self):
        return self.value


class Ball(BaseModel):
    """Grid ball {y : |y - center| <= radius} in index units, centred on a node"""
    model_config = ConfigDict(frozen=True)

    center: Tuple[int, ...]
    radius: int = Field(..., ge=0, description="Radius in cells (multiples of h)")

    def mask(self, grid: Grid) -> np.ndarray:
        return grid.index_squared_distance(self.center) <= self.radius ** 2

    def volume(self, grid: Grid) -> float:
        return float(np.count_nonzero(self.mask(grid)) * grid.cell_volume)

    @classmethod
    def around_cube(cls, cube: Cube, factor: int = 16) -> 'Ball':
        """Ball centred at the node nearest the cube centre with radius factor * side"""
        return cls(center=tuple(s + cube.side // 2 for s in cube.start), radius=factor * cube.side)


class CZConstants(BaseModel):
    """Realised constants of the three Calderon-Zygmund properties"""
    good_part: float = Field(..., description="max|h| / lambda")
    bad_mass: float = Field(..., description="max_j int|f_j| / (lambda |Q_j|)")
    cube_measure: float = Field(..., description="lambda sum|Q_j| / ||f||_1")


class CZDecomposition(BaseModel):
    """f = h + sum_j f_j at height lambda over disjoint dyadic cubes"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    lam: float = Field(..., gt=0.0, description="Height lambda")
    grid: Grid
    cubes: List[Cube]
    good_part: np.ndarray
    bad_parts: List[np.ndarray] = Field(..., description="f_j on Q_j, row-major within the cube")
    constants: CZConstants
    reconstruction_residual: float = Field(..., ge=0.0)
    degenerate: bool = Field(default=False, description="Root cube selected because lambda <= its average")

    @property
    def total_cube_measure(self) -> float:
        return float(sum(c.volume(self.grid) for c in self.cubes))

    def bad_part(self, j: int) -> np.ndarray:
        """f_j as a grid function"""
        values = np.zeros(self.grid.shape, dtype=self.bad_parts[j].dtype)
        cube = self.cubes[j]
        values[cube.slices()] = self.bad_parts[j].reshape((cube.side,) * cube.dim)
        return values.ravel()

    def within_bounds(self, good_bound: float, mass_bound: float, measure_bound: float = 1.0,
                      tol: float = 1e-12) -> bool:
        return (self.constants.good_part <= good_bound + tol
                and self.constants.bad_mass <= mass_bound + tol
                and self.constants.cube_measure <= measure_bound + tol)


class GoodLambdaParameters(BaseModel):
    """K, gamma and C1 chosen for the good-lambda lemma"""
    n: int = Field(..., ge=1)
    q: float = Field(..., gt=1.0, description="May be infinite")
    p: float = Field(..., ge=1.0)
    s: float = Field(..., ge=1.0)
    a: float = Field(..., ge=1.0)
    C0: float = Field(..., gt=0.0)
    rh_norm: float = Field(..., ge=1.0)
    K: float = Field(..., gt=0.0)
    gamma: float = Field(..., gt=0.0, lt=1.0)
    C1: float = Field(..., gt=0.0, description="May overflow to inf; see log10_C1")
    log10_C1: float
    widened: bool = Field(default=False, description="K was raised to 2^{n+2} a")

    @property
    def q_is_infinite(self) -> bool:
        return bool(np.isinf(self.q))

    def tail_factor(self) -> float:
        """(gamma/K + a^q/K^q)^{1/s}, with a^q/K^q read as 0 for q = infinity"""
        tail = 0.0 if self.q_is_infinite else float(np.exp(self.q * (np.log(self.a) - np.log(self.K))))
        return float((self.gamma / self.K + tail) ** (1.0 / self.s))


class ScenarioAudit(BaseModel):
    """Worst violations of the ball conditions over the sampled ball family"""
    cond1_violation: float = Field(..., description="max(F - G_B - H_B) on balls")
    cond2_violation: float = Field(..., description="worst excess of ||H_B||_q over a(MF + G)|B|^{1/q}")
    cond3_violation: float = Field(..., description="worst excess of ||G_B||_1 over G |B|")
    balls_checked: int = Field(..., ge=0)
    tolerance: float = Field(default=1e-12)

    @property
    def passed(self) -> bool:
        return max(self.cond1_violation, self.cond2_violation, self.cond3_violation) <= self.tolerance

    def worst(self) -> Tuple[str, float]:
        violations = {"cond1": self.cond1_violation, "cond2": self.cond2_violation,
                      "cond3": self.cond3_violation}
        name = max(violations, key=violations.get)
        return name, violations[name]


class GoodLambdaScenario(BaseModel):
    """
    F, G and the per-radius providers of G_B, H_B for the good-lambda lemma

    `ball_parts(k)` returns global arrays whose restriction to any ball of
    radius k cells is (G_B, H_B).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    label: str
    grid: Grid
    F: np.ndarray
    G: np.ndarray
    ball_parts: Callable[[int], Tuple[np.ndarray, np.ndarray]]
    radii: List[int] = Field(..., min_length=1, description="Sampled radii in cells")
    q: float = Field(..., gt=1.0)
    a: float = Field(..., ge=1.0)
    s: float = Field(default=1.0, ge=1.0)
    weight: Weight
    rh_norm: float = Field(..., ge=1.0, description="||w||_{RH_{s'}} over the weight's cube family")
    c1: float = Field(..., gt=0.0, description="Weak (1,1) constant of the ball family")
    cq: float = Field(..., gt=0.0, description="Weak (q,q) constant, 1 for q = infinity")
    MF: Optional[np.ndarray] = None
    audit: Optional[ScenarioAudit] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @field_validator('F', 'G')
    @classmethod
    def nonnegative(cls, v):
        v = np.asarray(v, dtype=float)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("F and G must be finite and nonnegative")
        return v

    @property
    def n(self) -> int:
        return self.grid.dim

    def C0(self) -> float:
        """2^{6(n+q)}(c1 + cq); 2^{6n}(c1 + 1) when q is infinite"""
        if np.isinf(self.q):
            return float(2.0 ** (6 * self.n) * (self.c1 + 1.0))
        return float(2.0 ** (6 * (self.n + self.q)) * (self.c1 + self.cq))


class LambdaRow(BaseModel):
    lam: float
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_json_record(self) -> Dict[str, float]:
        return {"lambda": self.lam, "lhs": self.lhs, "rhs": self.rhs, "margin": self.margin}


class GoodLambdaReport(BaseModel):
    """Both sides of the good-lambda inequality per lambda plus the L^p(w) conclusion"""
    label: str
    parameters: GoodLambdaParameters
    rows: List[LambdaRow]
    passed: bool
    C0: float
    norm_ratio: float = Field(..., description="||MF||_{L^p(w)} / ||G||_{L^p(w)}")
    norm_ratio_passed: bool

    def to_json_record(self) -> Dict[str, Any]:
        return {
            "label": self.label,
            "passed": self.passed,
            "C0": self.C0,
            "K": self.parameters.K,
            "gamma": self.parameters.gamma,
            "log10_C1": self.parameters.log10_C1,
            "norm_ratio": self.norm_ratio,
            "rows": [row.to_json_record() for row in self.rows],
        }


class RecurrenceReport(BaseModel):
    """c_j, d_j layer-cake pieces and the checks built on them"""
    p: float
    K: float
    gamma: float
    j_range: Tuple[int, int]
    c: List[float]
    d: List[float]
    worst_step_excess: float = Field(..., description="max_j c_j - c_{j-1}/2 - (K/gamma)^p d_j, relative")
    sum_c: float
    sum_d: float
    sum_bound: float = Field(..., description="2 (K/gamma)^p sum d_j")
    envelope_excess: float = Field(..., description="worst c_j over the weak (1,1) envelope for j < 0")
    quadrature: str = Field(default="exact")
    passed: bool


class LocalizationReport(BaseModel):
    """Cut-off inequality |{MF > K lam} n Q_j| <= |{M(F 1_{B_j}) > K lam / 2}| per Whitney cube"""
    lam: float
    K: float
    cubes_checked: int
    worst_excess: float
    skipped: bool = Field(default=False, description="E_lambda was empty or the whole grid")
    passed: bool


class WeakTypeReport(BaseModel):
    """Empirical weak (q,q) constant of a maximal family"""
    q: float
    constant: float = Field(..., ge=0.0)
    trials: int
    shape: MaximalShape
