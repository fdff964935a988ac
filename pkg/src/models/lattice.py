"""
Lattice data models
Grids, potentials, discretized operators and heat-kernel reports
"""
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import sparse

from src.utils.exceptions import DimensionMismatchError


def _frozen_array(value: Any, dtype=None) -> np.ndarray:
    """Copy into a read-only ndarray"""
    array = np.array(value, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class Boundary(str, Enum):
    """Boundary condition of a grid"""
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"

    def __str__(self):
        return self.value


class OperatorKind(str, Enum):
    """Which operator a lattice matrix discretizes"""
    LAPLACIAN = "laplacian"
    SCHRODINGER = "schrodinger"
    MAGNETIC_SCHRODINGER = "magnetic_schrodinger"

    def __str__(self):
        return self.value


class Grid(BaseModel):
    """
    Uniform tensor grid with N points per axis

    Grid functions are flat arrays of length N^dim in row-major order, so the
    last axis varies fastest.
    """
    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1, description="Spatial dimension n")
    points_per_axis: int = Field(..., ge=2, description="Points per axis N")
    spacing: float = Field(..., gt=0, description="Mesh width h")
    boundary: Boundary = Field(default=Boundary.PERIODIC)
    origin_offset: Tuple[float, ...] = Field(default=(), description="Coordinate of index 0 on each axis")

    @model_validator(mode='before')
    @classmethod
    def default_origin(cls, data: Any) -> Any:
        """Fill a zero origin when none is given"""
        if isinstance(data, dict) and not data.get('origin_offset'):
            data = dict(data)
            data['origin_offset'] = tuple([0.0] * int(data.get('dim', 1)))
        return data

    @model_validator(mode='after')
    def check_origin(self) -> 'Grid':
        if len(self.origin_offset) != self.dim:
            raise ValueError(f"origin_offset needs {self.dim} components, got {len(self.origin_offset)}")
        return self

    @classmethod
    def centered(cls, dim: int, points_per_axis: int, spacing: float,
                 boundary: Boundary = Boundary.PERIODIC) -> 'Grid':
        """Grid whose nodes are symmetric about the origin (0 falls between nodes when N is even)"""
        offset = -(points_per_axis - 1) * spacing / 2.0
        return cls(dim=dim, points_per_axis=points_per_axis, spacing=spacing,
                   boundary=boundary, origin_offset=tuple([offset] * dim))

    @classmethod
    def over_interval(cls, dim: int, points_per_axis: int, lower: float, upper: float,
                      boundary: Boundary = Boundary.PERIODIC) -> 'Grid':
        """Cell-centred grid covering [lower, upper]^dim"""
        spacing = (upper - lower) / points_per_axis
        offset = lower + spacing / 2.0
        return cls(dim=dim, points_per_axis=points_per_axis, spacing=spacing,
                   boundary=boundary, origin_offset=tuple([offset] * dim))

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def length(self) -> float:
        """Side length of the box (the period on periodic grids)"""
        return self.points_per_axis * self.spacing

    @property
    def periodic(self) -> bool:
        return self.boundary == Boundary.PERIODIC

    @property
    def is_dyadic(self) -> bool:
        n = self.points_per_axis
        return n & (n - 1) == 0

    def axis_coordinates(self, axis: int = 0) -> np.ndarray:
        return self.origin_offset[axis] + self.spacing * np.arange(self.points_per_axis)

    def index_coordinates(self) -> np.ndarray:
        """Integer multi-indices, shape (size, dim)"""
        return np.indices(self.shape).reshape(self.dim, -1).T

    def coordinates(self) -> np.ndarray:
        """Physical coordinates, shape (size, dim)"""
        axes = [self.axis_coordinates(k) for k in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    def radius(self) -> np.ndarray:
        """|x| at every node"""
        return np.sqrt(np.sum(self.coordinates() ** 2, axis=1))

    def reshape(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.shape)

    def wrap(self, displacement: np.ndarray) -> np.ndarray:
        """Torus displacement on periodic grids, identity otherwise"""
        if not self.periodic:
            return displacement
        period = self.length
        return displacement - period * np.round(displacement / period)

    def displacement_components(self, rows: Optional[np.ndarray] = None) -> Iterator[np.ndarray]:
        """
        Yield x_k - y_k for each axis k as (len(rows), size) matrices

        Args:
            rows: Optional subset of node indices used for x
        """
        coords = self.coordinates()
        source = coords if rows is None else coords[rows]
        for k in range(self.dim):
            yield self.wrap(source[:, k][:, None] - coords[:, k][None, :])

    def squared_distance_matrix(self, rows: Optional[np.ndarray] = None) -> np.ndarray:
        """|x - y|^2 with the torus metric on periodic grids"""
        total = None
        for component in self.displacement_components(rows):
            total = component ** 2 if total is None else total + component ** 2
        return total

    def index_squared_distance(self, center: Tuple[int, ...]) -> np.ndarray:
        """Squared distance in index units from the node `center`, wrapped on periodic grids"""
        total = np.zeros(self.size, dtype=np.int64)
        for k, component in enumerate(self.index_coordinates().T):
            delta = component - int(center[k])
            if self.periodic:
                delta = (delta + self.points_per_axis // 2) % self.points_per_axis - self.points_per_axis // 2
            total += delta * delta
        return total

    def max_index_radius(self) -> int:
        """Smallest radius in cells whose ball around any node covers the grid"""
        reach = self.points_per_axis // 2 if self.periodic else self.points_per_axis - 1
        return int(np.ceil(np.sqrt(self.dim) * reach))

    def with_spacing(self, spacing: float) -> 'Grid':
        """Same index structure at a new mesh width, coordinates scaled accordingly"""
        factor = spacing / self.spacing
        return self.model_copy(update={
            'spacing': spacing,
            'origin_offset': tuple(o * factor for o in self.origin_offset)
        })

    def with_points(self, points_per_axis: int) -> 'Grid':
        """Same physical box, cell-centred, resolved with a different number of points"""
        spacing = self.length / points_per_axis
        lower = tuple(o - self.spacing / 2.0 for o in self.origin_offset)
        return Grid(dim=self.dim, points_per_axis=points_per_axis, spacing=spacing,
                    boundary=self.boundary,
                    origin_offset=tuple(low + spacing / 2.0 for low in lower))

    def to_summary_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "points_per_axis": self.points_per_axis,
            "spacing": self.spacing,
            "boundary": self.boundary.value,
        }


class FieldSpec(BaseModel):
    """
    Electric potential V and magnetic vector potential A sampled at the nodes
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    potential: np.ndarray = Field(..., description="V at every node")
    vector_potential: Optional[np.ndarray] = Field(None, description="A as (dim, size) node samples")

    @field_validator('potential', mode='before')
    @classmethod
    def coerce_potential(cls, v):
        array = np.asarray(v, dtype=float).ravel()
        if not np.all(np.isfinite(array)):
            raise ValueError("potential must be finite")
        return _frozen_array(array)

    @field_validator('vector_potential', mode='before')
    @classmethod
    def coerce_vector_potential(cls, v):
        if v is None:
            return None
        array = np.asarray(v, dtype=float)
        if array.ndim == 1:
            array = array[None, :]
        if array.ndim != 2:
            raise ValueError("vector_potential must have shape (dim, size)")
        if not np.all(np.isfinite(array)):
            raise ValueError("vector_potential must be finite")
        return _frozen_array(array)

    @classmethod
    def zero(cls, grid: Grid) -> 'FieldSpec':
        return cls(potential=np.zeros(grid.size))

    @property
    def v_plus(self) -> np.ndarray:
        return np.maximum(self.potential, 0.0)

    @property
    def v_minus(self) -> np.ndarray:
        return np.maximum(-self.potential, 0.0)

    @property
    def has_magnetic_field(self) -> bool:
        return self.vector_potential is not None and bool(np.any(self.vector_potential != 0.0))

    def check_grid(self, grid: Grid):
        """Raise DimensionMismatchError unless the fields live on `grid`"""
        if self.potential.size != grid.size:
            raise DimensionMismatchError(
                f"potential has {self.potential.size} values, grid has {grid.size} nodes"
            )
        if self.vector_potential is not None:
            if self.vector_potential.shape != (grid.dim, grid.size):
                raise DimensionMismatchError(
                    f"vector potential has shape {self.vector_potential.shape}, "
                    f"expected {(grid.dim, grid.size)}"
                )

    def scaled(self, potential_factor: float, vector_factor: float = 1.0) -> 'FieldSpec':
        vector = None if self.vector_potential is None else self.vector_potential * vector_factor
        return FieldSpec(potential=self.potential * potential_factor, vector_potential=vector)


class LatticeOperator(BaseModel):
    """
    Sparse Hermitian discretization of H on a Grid
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: Grid
    matrix: Any = Field(..., description="scipy.sparse CSR matrix of size N^dim")
    kind: OperatorKind
    spectral_bound: float = Field(..., description="Gershgorin upper bound of the spectrum")
    spectral_floor: float = Field(..., description="Gershgorin lower bound of the spectrum")
    fields: Optional[FieldSpec] = Field(None, description="Fields the operator was built from")

    @field_validator('matrix', mode='before')
    @classmethod
    def coerce_matrix(cls, v):
        if not sparse.issparse(v):
            v = sparse.csr_matrix(np.asarray(v))
        return sparse.csr_matrix(v)

    @model_validator(mode='after')
    def check_size(self) -> 'LatticeOperator':
        if self.matrix.shape != (self.grid.size, self.grid.size):
            raise DimensionMismatchError(
                f"matrix shape {self.matrix.shape} does not match grid size {self.grid.size}"
            )
        return self

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.matrix.data)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ f

    def hermiticity_defect(self) -> float:
        """max|H - H*| / max|H|"""
        difference = self.matrix - self.matrix.conj().T
        scale = abs(self.matrix).max() or 1.0
        return float(abs(difference).max() / scale) if difference.nnz else 0.0

    def rescaled(self, factor: float) -> 'LatticeOperator':
        """
        The operator factor*H read on the grid with spacing h/sqrt(factor)

        The stencil on the finer spacing equals factor times the original, so
        this realises H -> factor*H together with x -> x/sqrt(factor).
        """
        if factor <= 0:
            raise ValueError("rescaling factor must be positive")
        fields = None
        if self.fields is not None:
            fields = self.fields.scaled(factor, np.sqrt(factor))
        return LatticeOperator(
            grid=self.grid.with_spacing(self.grid.spacing / np.sqrt(factor)),
            matrix=self.matrix * factor,
            kind=self.kind,
            spectral_bound=self.spectral_bound * factor,
            spectral_floor=self.spectral_floor * factor,
            fields=fields,
        )


class HeatKernelReport(BaseModel):
    """Empirical Gaussian constant of a heat kernel"""
    times: List[float] = Field(..., min_length=1, description="Sampled times t")
    K0_estimate: float = Field(..., ge=0.0, description="sup |p_t| t^{n/2} exp(|x-y|^2/(d t))")
    d_used: float = Field(..., gt=0.0, description="Gaussian rate denominator d")
    max_violation: float = Field(default=0.0, ge=0.0, description="Excess over the reference constant")
    reference_K0: Optional[float] = Field(None, description="Constant the violation is measured against")
    per_time: List[float] = Field(default_factory=list, description="Supremum at each sampled time")
    noise_floor: float = Field(default=0.0, ge=0.0, description="Kernel entries at or below this were skipped")
    grid: Optional[Grid] = None

    @field_validator('times')
    @classmethod
    def positive_times(cls, v):
        if any(t <= 0 for t in v):
            raise ValueError("times must be positive")
        return v

    def to_summary_dict(self) -> Dict[str, Any]:
        return {
            "times": self.times,
            "K0_estimate": self.K0_estimate,
            "d_used": self.d_used,
            "max_violation": self.max_violation,
            "per_time": self.per_time,
            "grid": self.grid.to_summary_dict() if self.grid else None,
        }
