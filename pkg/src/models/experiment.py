"""
Experiment configuration and report models
Declarative experiment documents and the rows they produce
"""
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.lattice import Boundary
from src.models.multiplier import MultiplierKind
from src.utils.exceptions import ParameterError


class ExperimentId(str, Enum):
    """Verification experiments"""
    E1 = "E1"  # L^p norm of g(sqrt H) against 6(p + 1/(p-1))
    E2 = "E2"  # growth of ||H^{iy}||_{L^p} in y
    E3 = "E3"  # weighted L^q(w) norm of g(sqrt H)
    E4 = "E4"  # ||H^theta f||_{L^p(w)} / ||(-Delta)^theta f||_{L^p(w)}
    E5 = "E5"  # kernel decay of alpha_r(sqrt H) in r
    E6 = "E6"  # K0 against the Kato blow-up shape
    E7 = "E7"  # good-lambda lemma on the bootstrap construction
    E8 = "E8"  # ||Hg|| / ||Delta g|| and the gradient estimates

    def __str__(self):
        return self.value

    @property
    def description(self) -> str:
        return {
            "E1": "L^p operator norm of g(sqrt H) against the 6(p + 1/(p-1)) shape",
            "E2": "growth exponent of ||H^{iy}||_{L^p -> L^p} and of mu_a(s^{2iy}) in y",
            "E3": "weighted L^q(w) norm of g(sqrt H) for w in A_p",
            "E4": "fractional powers: ||H^theta f||_{L^p(w)} against ||(-Delta)^theta f||_{L^p(w)}",
            "E5": "kernel decay of psi_r(sqrt H) and sqrt H psi_r(sqrt H) across r",
            "E6": "Gaussian constant K0 as the Kato norm of V_- approaches c_n",
            "E7": "good-lambda lemma on F = |g(sqrt H) f|^nu",
            "E8": "||Hg||_{L^p(w)} / ||Delta g||_{L^p(w)} and sqrt H g(sqrt H) against the gradient",
        }[self.value]


class GridConfig(BaseModel):
    """Grid block of an experiment document"""
    dim: int = Field(default=1, ge=1)
    n_points: int = Field(default=64, ge=2)
    spacing: Optional[float] = Field(None, gt=0.0)
    length: Optional[float] = Field(None, gt=0.0, description="Side length; spacing = length / n_points")
    boundary: Boundary = Field(default=Boundary.PERIODIC)
    centered: bool = Field(default=True)

    @model_validator(mode='after')
    def resolve_spacing(self) -> 'GridConfig':
        if self.spacing is None and self.length is None:
            raise ValueError("grid needs either spacing or length")
        return self

    def spacing_for(self, n_points: int) -> float:
        """Mesh width at a given resolution; a declared length stays fixed under refinement"""
        if self.length is not None:
            return self.length / n_points
        return float(self.spacing) * self.n_points / n_points


class FieldConfig(BaseModel):
    """
    Potential and vector potential, as sympy expressions in x, y, z, r or table files
    """
    potential: Optional[str] = Field(None, description="Expression for V")
    potential_table: Optional[str] = Field(None, description="Table file with one V value per node")
    vector_potential: Optional[List[str]] = Field(None, description="One expression per axis for A")
    vector_potential_table: Optional[str] = Field(None, description="Table file with dim * size values")

    @model_validator(mode='after')
    def one_source(self) -> 'FieldConfig':
        if self.potential is not None and self.potential_table is not None:
            raise ValueError("give either potential or potential_table, not both")
        if self.vector_potential is not None and self.vector_potential_table is not None:
            raise ValueError("give either vector_potential or vector_potential_table, not both")
        return self


class MultiplierConfig(BaseModel):
    """Built-in multiplier with its parameters"""
    kind: MultiplierKind = Field(default=MultiplierKind.HEAT)
    params: Dict[str, float] = Field(default_factory=dict)
    table: Optional[str] = Field(None, description="Table of (s, Re g, Im g) rows for custom_table")

    @model_validator(mode='after')
    def table_for_custom(self) -> 'MultiplierConfig':
        if self.kind == MultiplierKind.CUSTOM_TABLE and not self.table:
            raise ValueError("custom_table multipliers need a table file")
        if self.kind == MultiplierKind.CUSTOM:
            raise ValueError("custom multipliers cannot be declared in a document")
        return self


class WeightKind(str, Enum):
    UNIFORM = "uniform"
    POWER = "power"
    TABLE = "table"

    def __str__(self):
        return self.value


class WeightConfig(BaseModel):
    """Weight block: uniform, power |x|^alpha or table file"""
    kind: WeightKind = Field(default=WeightKind.UNIFORM)
    alpha: float = Field(default=0.0)
    table: Optional[str] = None

    @model_validator(mode='after')
    def table_given(self) -> 'WeightConfig':
        if self.kind == WeightKind.TABLE and not self.table:
            raise ValueError("table weights need a table file")
        return self

    @property
    def label(self) -> str:
        if self.kind == WeightKind.POWER:
            return f"|x|^{self.alpha:g}"
        if self.kind == WeightKind.TABLE:
            return f"table({self.table})"
        return "1"


class ExperimentConfig(BaseModel):
    """
    One experiment document

    Lists are swept; the experiment decides which ones it reads.
    """
    model_config = ConfigDict(use_enum_values=False)

    experiment: ExperimentId
    name: Optional[str] = None
    grid: GridConfig = Field(default_factory=lambda: GridConfig(spacing=1.0))
    refinements: List[int] = Field(default_factory=list, description="Extra n_points for refinement trends")
    fields: FieldConfig = Field(default_factory=FieldConfig)
    multiplier: MultiplierConfig = Field(default_factory=MultiplierConfig)
    weights: List[WeightConfig] = Field(default_factory=lambda: [WeightConfig()])

    p_values: List[float] = Field(default_factory=lambda: [2.0])
    q_values: List[float] = Field(default_factory=list)
    sigma: Optional[float] = Field(None, description="Smoothness order of the multiplier norm")
    theta_values: List[float] = Field(default_factory=list)
    nu: float = Field(default=2.0, gt=1.0)
    y_values: List[float] = Field(default_factory=list)
    a_values: List[float] = Field(default_factory=lambda: [1.0, 2.0])
    r_values: List[float] = Field(default_factory=list)
    times: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    d: Optional[float] = Field(None, gt=0.0, description="Gaussian rate denominator")
    kato_ratios: List[float] = Field(default_factory=list, description="Targets for ||V_-||_K / c_n")
    potential_scales: List[float] = Field(default_factory=list)
    lambda_points: int = Field(default=20, ge=2)

    trials: int = Field(default=20, ge=1)
    seed: int = Field(default=12345)
    output: Optional[str] = None

    @field_validator('p_values', 'q_values')
    @classmethod
    def exponents_above_one(cls, v):
        if any(p <= 1.0 for p in v):
            raise ValueError("Lebesgue exponents must exceed 1")
        return v

    @field_validator('theta_values')
    @classmethod
    def theta_in_unit_interval(cls, v):
        if any(not 0.0 <= t <= 1.0 for t in v):
            raise ValueError("theta must lie in [0, 1]")
        return v

    @field_validator('kato_ratios')
    @classmethod
    def below_threshold(cls, v):
        if any(not 0.0 <= k < 1.0 for k in v):
            raise ValueError("kato_ratios must lie in [0, 1)")
        return v

    @property
    def label(self) -> str:
        return self.name or self.experiment.value

    @property
    def n(self) -> int:
        return self.grid.dim

    def check_hypotheses(self):
        """
        Reject parameter sets for which the estimate under test says nothing

        Raises:
            ParameterError: naming the violated hypothesis
        """
        n = self.n
        experiment = self.experiment
        if experiment in (ExperimentId.E1, ExperimentId.E3) and self.sigma is not None:
            if self.sigma <= n / 2:
                raise ParameterError(f"sigma={self.sigma} is not above n/2={n / 2}", "sigma > n/2")
        if experiment == ExperimentId.E3:
            if self.sigma is None:
                raise ParameterError("E3 needs sigma", "q > p max{1, n/sigma}")
            if not self.q_values:
                raise ParameterError("E3 needs q_values", "q > p max{1, n/sigma}")
            for p in self.p_values:
                for q in self.q_values:
                    if q <= p * max(1.0, n / self.sigma):
                        raise ParameterError(
                            f"q={q} does not exceed p max(1, n/sigma) = {p * max(1.0, n / self.sigma)}",
                            "q > p max{1, n/sigma}"
                        )
        if experiment == ExperimentId.E4:
            if not self.theta_values:
                raise ParameterError("E4 needs theta_values", "1 < p < n/(2 theta)")
            for theta in self.theta_values:
                for p in self.p_values:
                    if theta > 0 and not 1.0 < p < n / (2.0 * theta):
                        raise ParameterError(
                            f"p={p} is outside (1, n/(2 theta)) = (1, {n / (2.0 * theta):g}) for theta={theta}",
                            "1 < p < n/(2 theta)"
                        )
        if experiment == ExperimentId.E6 and n < 3:
            raise ParameterError(f"Kato norms need n >= 3, got n={n}", "n >= 3")
        if experiment == ExperimentId.E7 and self.nu <= 1.0:
            raise ParameterError("nu must exceed 1", "nu > n/sigma")
        if experiment == ExperimentId.E8 and n < 3:
            raise ParameterError(f"the weighted Sobolev step needs n >= 3, got n={n}", "p < n/2")

    def to_summary_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment.value,
            "name": self.label,
            "grid": self.grid.model_dump(mode='json'),
            "trials": self.trials,
            "seed": self.seed,
        }


class ReportRow(BaseModel):
    """One measured-vs-predicted line of a report"""
    model_config = ConfigDict(populate_by_name=True)

    experiment: str
    params: str
    measured: float
    predicted: Optional[float] = None
    ratio: Optional[float] = None
    passed: bool = Field(..., alias="pass")
    runtime_ms: float = Field(default=0.0, ge=0.0)

    @model_validator(mode='before')
    @classmethod
    def fill_ratio(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            predicted = data.get('predicted')
            if data.get('ratio') is None and predicted is not None and predicted > 0:
                data['ratio'] = float(data['measured']) / float(predicted)
        return data

    @property
    def sort_key(self):
        return (self.experiment, self.params)

    def to_record(self) -> Dict[str, Any]:
        """Columns in report order"""
        return {
            "experiment": self.experiment,
            "params": self.params,
            "measured": self.measured,
            "predicted": self.predicted,
            "ratio": self.ratio,
            "pass": self.passed,
            "runtime_ms": self.runtime_ms,
        }
