"""
Experiment document loader
Parses YAML experiment documents and builds grids, fields, multipliers and weights from them
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import sympy
import yaml
from pydantic import ValidationError

from src.models.experiment import (
    ExperimentConfig,
    FieldConfig,
    GridConfig,
    MultiplierConfig,
    WeightConfig,
    WeightKind,
)
from src.models.lattice import FieldSpec, Grid
from src.models.multiplier import MultiplierFn, MultiplierKind
from src.models.weights import Weight
from src.utils.exceptions import ParameterError
from src.utils.helpers import read_table

logger = logging.getLogger(__name__)

_SYMBOLS = sympy.symbols("x y z r", real=True)


def load_experiments(path: Union[str, Path]) -> List[ExperimentConfig]:
    """
    Read one experiment mapping or {experiments: [...]} from a YAML file

    Relative table paths are resolved against the document's directory.

    Raises:
        ValueError: if the document is not a mapping or fails validation
    """
    path = Path(path)
    with open(path) as handle:
        document = yaml.safe_load(handle)
    if not isinstance(document, dict):
        raise ValueError(f"{path} must hold a mapping")
    entries = document["experiments"] if "experiments" in document else [document]
    configs = []
    for i, entry in enumerate(entries):
        try:
            config = ExperimentConfig(**_resolve_tables(entry, path.parent))
        except ValidationError as e:
            raise ValueError(f"experiment {i} in {path} is invalid: {e}") from e
        config.check_hypotheses()
        configs.append(config)
    logger.info(f"Loaded {len(configs)} experiments from {path}")
    return configs


def _resolve_tables(entry: Dict[str, Any], base: Path) -> Dict[str, Any]:
    entry = dict(entry)
    fields = dict(entry.get("fields") or {})
    for key in ("potential_table", "vector_potential_table"):
        if fields.get(key):
            fields[key] = str(base / fields[key])
    if fields:
        entry["fields"] = fields
    if entry.get("multiplier", {}).get("table"):
        entry["multiplier"] = {**entry["multiplier"], "table": str(base / entry["multiplier"]["table"])}
    weights = []
    for weight in entry.get("weights") or []:
        weight = dict(weight)
        if weight.get("table"):
            weight["table"] = str(base / weight["table"])
        weights.append(weight)
    if weights:
        entry["weights"] = weights
    return entry


def evaluate_expression(expression: str, grid: Grid) -> np.ndarray:
    """
    Evaluate a sympy expression in x, y, z and r = |x| at every node

    Raises:
        ValueError: if the expression uses other symbols or is not finite
    """
    parsed = sympy.sympify(expression, locals=dict(zip(("x", "y", "z", "r"), _SYMBOLS)))
    unknown = {str(s) for s in parsed.free_symbols} - {"x", "y", "z", "r"}
    if unknown:
        raise ValueError(f"expression {expression!r} uses unknown symbols {sorted(unknown)}")
    coords = grid.coordinates()
    columns = [coords[:, k] if k < grid.dim else np.zeros(grid.size) for k in range(3)]
    function = sympy.lambdify(_SYMBOLS, parsed, modules="numpy")
    values = np.broadcast_to(np.asarray(function(*columns, grid.radius()), dtype=float), (grid.size,)).copy()
    if not np.all(np.isfinite(values)):
        raise ValueError(f"expression {expression!r} is not finite on the grid")
    return values


def build_grid(config: GridConfig, n_points: Optional[int] = None) -> Grid:
    n_points = n_points or config.n_points
    spacing = config.spacing_for(n_points)
    if config.centered:
        return Grid.centered(config.dim, n_points, spacing, boundary=config.boundary)
    return Grid(dim=config.dim, points_per_axis=n_points, spacing=spacing, boundary=config.boundary)


def build_fields(config: FieldConfig, grid: Grid) -> FieldSpec:
    """V and A sampled on the grid; absent entries are zero"""
    potential = np.zeros(grid.size)
    if config.potential is not None:
        potential = evaluate_expression(config.potential, grid)
    elif config.potential_table is not None:
        potential = read_table(config.potential_table, expected=grid.size)
    vector = None
    if config.vector_potential is not None:
        if len(config.vector_potential) != grid.dim:
            raise ParameterError(f"vector_potential needs {grid.dim} components", "A: R^n -> R^n")
        vector = np.stack([evaluate_expression(e, grid) for e in config.vector_potential])
    elif config.vector_potential_table is not None:
        vector = read_table(config.vector_potential_table, expected=grid.dim * grid.size).reshape(grid.dim, -1)
    return FieldSpec(potential=potential, vector_potential=vector)


def build_multiplier(config: MultiplierConfig) -> MultiplierFn:
    params = config.params
    kind = config.kind
    if kind == MultiplierKind.CONSTANT:
        return MultiplierFn.constant(params.get("c", 1.0))
    if kind == MultiplierKind.HEAT:
        return MultiplierFn.heat(params.get("t", 1.0))
    if kind == MultiplierKind.IMAGINARY_POWER:
        return MultiplierFn.imaginary_power(params.get("y", 0.0))
    if kind == MultiplierKind.FRACTIONAL:
        return MultiplierFn.fractional(params.get("theta", 0.5))
    if kind == MultiplierKind.INDICATOR_BAND:
        return MultiplierFn.indicator_band(params.get("lower", 0.0), params.get("upper", 1.0))
    if kind == MultiplierKind.SMOOTHED_INDICATOR:
        return MultiplierFn.smoothed_indicator(params.get("radius", 1.0))
    table = np.loadtxt(config.table, comments='#', ndmin=2)
    imag = table[:, 2] if table.shape[1] > 2 else None
    return MultiplierFn.custom_table(table[:, 0], table[:, 1], imag, label=f"custom_table({Path(config.table).name})")


def build_weight(config: WeightConfig, grid: Grid) -> Weight:
    if config.kind == WeightKind.POWER:
        radius = np.maximum(grid.radius(), grid.spacing / 2.0)
        return Weight(values=radius ** config.alpha, grid=grid, label=config.label)
    if config.kind == WeightKind.TABLE:
        return Weight(values=read_table(config.table, expected=grid.size), grid=grid, label=config.label)
    return Weight.uniform(grid)
