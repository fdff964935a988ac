"""
Weight data models
Cubes, cube families, weights and the A_p / RH_q reports computed over them
"""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.lattice import Grid, _frozen_array
from src.utils.exceptions import DimensionMismatchError


class Cube(BaseModel):
    """
    Axis-aligned cube of grid cells: indices start[k] <= i_k < start[k] + side
    """
    model_config = ConfigDict(frozen=True)

    start: Tuple[int, ...] = Field(..., description="Lowest index on each axis")
    side: int = Field(..., ge=1, description="Cells per side")

    @property
    def dim(self) -> int:
        return len(self.start)

    @property
    def count(self) -> int:
        return self.side ** self.dim

    def slices(self) -> Tuple[slice, ...]:
        return tuple(slice(s, s + self.side) for s in self.start)

    def mask(self, grid: Grid) -> np.ndarray:
        """Flat boolean indicator of the cube on `grid`"""
        indicator = np.zeros(grid.shape, dtype=bool)
        indicator[self.slices()] = True
        return indicator.ravel()

    def volume(self, grid: Grid) -> float:
        return self.count * grid.cell_volume

    def center_index(self) -> np.ndarray:
        """Centre in continuous index coordinates (cell i spans [i, i+1))"""
        return np.asarray(self.start, dtype=float) + self.side / 2.0

    def dilated_mask(self, factor: float, grid: Grid) -> np.ndarray:
        """
        In-grid cells meeting the open cube factor*Q with the same centre
        """
        center = self.center_index()
        half = factor * self.side / 2.0
        per_axis = []
        for k in range(self.dim):
            lower = int(np.floor(center[k] - half))
            upper = int(np.ceil(center[k] + half))
            cells = np.zeros(grid.points_per_axis, dtype=bool)
            cells[max(lower, 0):min(upper, grid.points_per_axis)] = True
            per_axis.append(cells)
        indicator = per_axis[0]
        for cells in per_axis[1:]:
            indicator = np.logical_and.outer(indicator, cells)
        return indicator.ravel()

    def children(self) -> List['Cube']:
        """The 2^dim dyadic children (empty for unit cells)"""
        if self.side < 2:
            return []
        half = self.side // 2
        offsets = np.indices((2,) * self.dim).reshape(self.dim, -1).T
        return [Cube(start=tuple(int(s + half * o) for s, o in zip(self.start, offset)), side=half)
                for offset in offsets]

    def to_list(self) -> List[int]:
        return [*self.start, self.side]


def default_cube_family(grid: Grid) -> List[Cube]:
    """
    Dyadic cubes of the grid plus the family shifted by half a side

    Sides are the powers of two up to N (and N itself); only cubes lying
    inside the grid are kept.
    """
    n_points = grid.points_per_axis
    sides = sorted({2 ** k for k in range(int(np.log2(n_points)) + 1)} | {n_points})
    family = []
    for side in sides:
        offsets = [0] if side == 1 else [0, side // 2]
        for offset in offsets:
            starts_1d = np.arange(offset, n_points - side + 1, side)
            if starts_1d.size == 0:
                continue
            mesh = np.meshgrid(*([starts_1d] * grid.dim), indexing='ij')
            for start in zip(*(m.ravel() for m in mesh)):
                family.append(Cube(start=tuple(int(s) for s in start), side=int(side)))
    return family


class Weight(BaseModel):
    """
    Positive grid function w with the cube family its constants are taken over
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray = Field(..., description="w at every node")
    grid: Grid
    cube_family: List[Cube] = Field(default_factory=list)
    label: str = Field(default="w")
    floor: float = Field(default=1e-30, gt=0.0)

    @model_validator(mode='before')
    @classmethod
    def floor_values(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        values = np.asarray(data['values'], dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("weight values must be finite")
        if np.any(values < 0):
            raise ValueError("weight values must be nonnegative")
        data['values'] = _frozen_array(np.maximum(values, data.get('floor', 1e-30)))
        if not data.get('cube_family'):
            data['cube_family'] = default_cube_family(data['grid'])
        return data

    @model_validator(mode='after')
    def check_grid(self) -> 'Weight':
        if self.values.size != self.grid.size:
            raise DimensionMismatchError(
                f"weight has {self.values.size} values, grid has {self.grid.size} nodes"
            )
        for cube in self.cube_family:
            if cube.dim != self.grid.dim or any(
                s < 0 or s + cube.side > self.grid.points_per_axis for s in cube.start
            ):
                raise ValueError(f"cube {cube.to_list()} does not lie in the grid")
        return self

    @classmethod
    def uniform(cls, grid: Grid, value: float = 1.0) -> 'Weight':
        return cls(values=np.full(grid.size, value), grid=grid, label=f"constant({value:g})")

    def power(self, exponent: float, label: Optional[str] = None) -> 'Weight':
        """w^exponent on the same family"""
        return Weight(values=self.values ** exponent, grid=self.grid, cube_family=self.cube_family,
                      label=label or f"({self.label})^{exponent:g}", floor=self.floor)

    def measure(self, mask: np.ndarray) -> float:
        """w(E) = sum over E of w h^n"""
        return float(np.sum(self.values[mask]) * self.grid.cell_volume)

    @property
    def sup(self) -> float:
        return float(np.max(self.values))


class ApReport(BaseModel):
    """Lower bound of the A_p constant over a cube family"""
    p: float = Field(..., ge=1.0)
    constant: float = Field(..., description="sup over the family")
    argmax_cube: List[int] = Field(..., description="start indices followed by the side")
    family_size: int = Field(..., ge=1)
    lower_bound: bool = Field(default=True, description="Finite families bound the true sup from below")

    @field_validator('constant')
    @classmethod
    def jensen(cls, v):
        # Jensen forces >= 1; allow rounding
        if v < 1.0 - 1e-9:
            raise ValueError(f"A_p constant {v} is below 1")
        return max(v, 1.0)

    def to_json_record(self) -> Dict[str, Any]:
        return {"p_or_q": self.p, "constant": self.constant, "argmax_cube": self.argmax_cube}


class RHReport(BaseModel):
    """Best reverse Hoelder constant over a cube family (q may be infinite)"""
    q: float = Field(..., gt=1.0)
    constant: float
    argmax_cube: List[int]
    family_size: int = Field(..., ge=1)
    lower_bound: bool = Field(default=True)

    @field_validator('constant')
    @classmethod
    def power_mean(cls, v):
        if v < 1.0 - 1e-9:
            raise ValueError(f"RH_q constant {v} is below 1")
        return max(v, 1.0)

    def to_json_record(self) -> Dict[str, Any]:
        return {"p_or_q": "inf" if np.isinf(self.q) else self.q, "constant": self.constant,
                "argmax_cube": self.argmax_cube}


class FactorizationResult(BaseModel):
    """w = a b^{1-p} with both factors expected in A_1"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    a: Weight
    b: Weight
    p: float
    a1_constant_a: float
    a1_constant_b: float
    residual: float = Field(..., ge=0.0, description="max |w - a b^{1-p}| / w")
    iterations: int = Field(..., ge=0)
    converged: bool = Field(default=True, description="False when the iteration diverged (best effort)")

    def to_summary_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "a1_constant_a": self.a1_constant_a,
            "a1_constant_b": self.a1_constant_b,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


class MuckenhouptWheedenReport(BaseModel):
    """Constants of v = w^{1/p} entering the weighted Sobolev step"""
    p: float
    n: int
    v_ap_constant: float = Field(..., description="||v||_{A_{2-1/p}}")
    p_star: float = Field(..., description="np/(n-p)")
    p_star_star: float = Field(..., description="np/(n-2p)")
    rh_p_star: float
    rh_p_star_star: float

    @property
    def finite(self) -> bool:
        return all(np.isfinite([self.v_ap_constant, self.rh_p_star, self.rh_p_star_star]))
