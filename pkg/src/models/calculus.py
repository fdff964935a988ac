"""
Functional calculus data models
Eigendecompositions, kernel matrices and propagation reports
"""
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.models.lattice import Grid, LatticeOperator
from src.utils.exceptions import DimensionMismatchError, NegativeSpectrumError


class SpectralDecomposition(BaseModel):
    """
    H = V diag(lambda) V* for a LatticeOperator, the exact oracle for g(sqrt(H))
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray = Field(..., description="Nondecreasing eigenvalues")
    eigenvectors: np.ndarray = Field(..., description="Orthonormal eigenvectors as columns")
    source: LatticeOperator
    clamp_tolerance: float = Field(default=1e-8, gt=0.0)

    @field_validator('eigenvalues', 'eigenvectors', mode='before')
    @classmethod
    def read_only(cls, v):
        array = np.array(v, copy=True)
        array.setflags(write=False)
        return array

    @model_validator(mode='after')
    def check_shapes(self) -> 'SpectralDecomposition':
        size = self.source.size
        if self.eigenvalues.shape != (size,) or self.eigenvectors.shape != (size, size):
            raise DimensionMismatchError("eigenpairs do not match the operator size")
        return self

    @property
    def grid(self) -> Grid:
        return self.source.grid

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.eigenvalues))) or 1.0

    def clamped_eigenvalues(self) -> np.ndarray:
        """
        Eigenvalues with the small negative ones set to 0

        Raises:
            NegativeSpectrumError: if an eigenvalue lies below -tol*max|lambda|
        """
        floor = -self.clamp_tolerance * self.scale
        lowest = float(self.eigenvalues[0])
        if lowest < floor:
            raise NegativeSpectrumError(
                f"lowest eigenvalue {lowest:.3e} is below the clamp floor {floor:.3e}"
            )
        return np.maximum(self.eigenvalues, 0.0)

    def kernel_mask(self) -> np.ndarray:
        """Eigenvalues treated as 0"""
        return self.eigenvalues <= self.clamp_tolerance * self.scale

    def coefficients(self, f: np.ndarray) -> np.ndarray:
        return self.eigenvectors.conj().T @ f

    def synthesize(self, spectral_values: np.ndarray, f: np.ndarray) -> np.ndarray:
        """V diag(values) V* f for a vector or a block of columns"""
        coefficients = self.coefficients(f)
        if coefficients.ndim == 1:
            return self.eigenvectors @ (spectral_values * coefficients)
        return self.eigenvectors @ (spectral_values[:, None] * coefficients)

    def matrix_function(self, spectral_values: np.ndarray) -> np.ndarray:
        """V diag(values) V*"""
        return (self.eigenvectors * spectral_values[None, :]) @ self.eigenvectors.conj().T

    def orthonormality_defect(self) -> float:
        gram = self.eigenvectors.conj().T @ self.eigenvectors
        return float(np.max(np.abs(gram - np.eye(gram.shape[0]))))

    def reconstruction_residual(self) -> float:
        """max|H - sum lambda_i e_i e_i*| / max|lambda|"""
        rebuilt = self.matrix_function(self.eigenvalues.astype(complex if np.iscomplexobj(self.eigenvectors) else float))
        return float(np.max(np.abs(self.source.dense() - rebuilt)) / self.scale)


class KernelMatrix(BaseModel):
    """
    Integral kernel K(x, y) of an operator on a grid

    With the density convention the entries are matrix entries divided by
    h^n, so (Kf)(x) = sum_y K(x, y) f(y) h^n.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray
    grid: Grid
    density_convention: bool = Field(default=True)
    label: str = Field(default="")

    @field_validator('entries', mode='before')
    @classmethod
    def read_only(cls, v):
        array = np.array(v, copy=True)
        array.setflags(write=False)
        return array

    @model_validator(mode='after')
    def check_size(self) -> 'KernelMatrix':
        if self.entries.shape != (self.grid.size, self.grid.size):
            raise DimensionMismatchError(
                f"kernel has shape {self.entries.shape}, expected {(self.grid.size, self.grid.size)}"
            )
        return self

    @classmethod
    def from_operator_matrix(cls, matrix: np.ndarray, grid: Grid, label: str = "") -> 'KernelMatrix':
        return cls(entries=np.asarray(matrix) / grid.cell_volume, grid=grid, label=label)

    def operator_matrix(self) -> np.ndarray:
        return self.entries * self.grid.cell_volume if self.density_convention else np.asarray(self.entries)

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.operator_matrix() @ f

    def compose(self, other: 'KernelMatrix') -> 'KernelMatrix':
        """Kernel of the product operator self * other"""
        if other.grid != self.grid:
            raise DimensionMismatchError("cannot compose kernels on different grids")
        return KernelMatrix.from_operator_matrix(
            self.operator_matrix() @ other.operator_matrix(), self.grid,
            label=f"{self.label}*{other.label}"
        )

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))


class FiniteSpeedReport(BaseModel):
    """Kernel mass of cos(t sqrt(H)) outside the light cone"""
    t: float = Field(..., ge=0.0)
    buffer: float = Field(..., ge=0.0)
    outside_mass: float = Field(..., ge=0.0)
    total_mass: float = Field(..., ge=0.0)
    relative_mass: float = Field(..., ge=0.0)
    tolerance: float = Field(..., gt=0.0)
    passed: bool

    def to_summary_dict(self) -> Dict[str, Any]:
        return self.model_dump()


class ChebyshevConvergence(BaseModel):
    """Deviation of the Chebyshev path from the eigen-oracle per degree"""
    degrees: List[int]
    errors: List[float]
    tolerance: float
    degree_reached: Optional[int] = Field(None, description="First degree with error <= tolerance")


class RescalingReport(BaseModel):
    """Both sides of the dyadic rescaling identity"""
    j: int
    fine_points: int
    coarse_points: int
    max_difference: float
    reference_norm: float
    relative_difference: float
