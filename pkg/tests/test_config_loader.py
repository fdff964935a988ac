"""
Tests for experiment documents and the objects built from them
"""
from pathlib import Path

import numpy as np
import pytest
import yaml

from src.config import load_experiments
from src.config.loader import build_fields, build_grid, build_multiplier, build_weight, evaluate_expression
from src.models.experiment import ExperimentId, FieldConfig, GridConfig, MultiplierConfig, WeightConfig
from src.models.lattice import Boundary, Grid
from src.models.multiplier import MultiplierKind
from src.utils.exceptions import ParameterError

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def write_document(tmp_path, document, name="experiment.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(document))
    return path


class TestLoading:

    def test_single_document(self):
        configs = load_experiments(CONFIG_DIR / "e1_lp_norm.yaml")
        assert len(configs) == 1
        config = configs[0]
        assert config.experiment == ExperimentId.E1
        assert config.grid.boundary == Boundary.PERIODIC
        assert config.refinements == [64, 128]
        assert config.label == "E1"

    def test_all_experiments(self):
        configs = load_experiments(CONFIG_DIR / "all.yaml")
        assert [c.experiment for c in configs] == list(ExperimentId)

    @pytest.mark.parametrize("name", sorted(p.name for p in CONFIG_DIR.glob("e*.yaml")))
    def test_shipped_documents_are_valid(self, name):
        assert load_experiments(CONFIG_DIR / name)

    @pytest.mark.parametrize("document", [
        {"experiment": "E3", "grid": {"dim": 1, "n_points": 16, "length": 8.0},
         "sigma": 2.0, "p_values": [2.0], "q_values": [2.0]},
        {"experiment": "E4", "grid": {"dim": 3, "n_points": 6, "length": 3.0},
         "theta_values": [0.5], "p_values": [4.0]},
        {"experiment": "E6", "grid": {"dim": 2, "n_points": 8, "length": 4.0}, "kato_ratios": [0.5]},
        {"experiment": "E8", "grid": {"dim": 1, "n_points": 8, "length": 4.0}},
        {"experiment": "E1", "grid": {"dim": 2, "n_points": 8, "length": 4.0}, "sigma": 1.0},
    ])
    def test_hypotheses_rejected(self, tmp_path, document):
        with pytest.raises(ParameterError):
            load_experiments(write_document(tmp_path, document))

    @pytest.mark.parametrize("document", [
        {"experiment": "E9", "grid": {"dim": 1, "n_points": 8, "length": 4.0}},
        {"experiment": "E1", "grid": {"dim": 1, "n_points": 8}},
        {"experiment": "E1", "grid": {"dim": 1, "n_points": 8, "length": 4.0}, "p_values": [1.0]},
        {"experiment": "E6", "grid": {"dim": 3, "n_points": 6, "length": 3.0}, "kato_ratios": [1.0]},
    ])
    def test_invalid_documents(self, tmp_path, document):
        with pytest.raises(ValueError):
            load_experiments(write_document(tmp_path, document))

    def test_non_mapping_rejected(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValueError):
            load_experiments(path)

    def test_table_paths_resolved_against_document(self, tmp_path):
        (tmp_path / "g.txt").write_text("0 1\n1 0.5\n4 0\n")
        document = {"experiment": "E1", "grid": {"dim": 1, "n_points": 8, "length": 4.0},
                    "multiplier": {"kind": "custom_table", "table": "g.txt"}}
        config = load_experiments(write_document(tmp_path, document))[0]
        assert Path(config.multiplier.table) == tmp_path / "g.txt"


class TestBuilders:

    def test_length_fixed_under_refinement(self):
        config = GridConfig(dim=1, n_points=32, length=16.0, boundary=Boundary.PERIODIC)
        assert build_grid(config).spacing == 0.5
        refined = build_grid(config, 64)
        assert refined.spacing == 0.25
        assert refined.length == pytest.approx(16.0)

    def test_expression(self):
        grid = Grid.centered(2, 5, 0.5, boundary=Boundary.DIRICHLET)
        values = evaluate_expression("exp(-r**2)", grid)
        np.testing.assert_allclose(values, np.exp(-grid.radius() ** 2))
        np.testing.assert_allclose(evaluate_expression("2", grid), 2.0)

    def test_expression_unknown_symbol(self):
        with pytest.raises(ValueError):
            evaluate_expression("t * x", Grid.centered(1, 5, 0.5))

    def test_expression_must_be_finite(self):
        with pytest.raises(ValueError):
            evaluate_expression("1/x", Grid.centered(1, 5, 0.5))

    def test_fields(self):
        grid = Grid.centered(2, 4, 0.5)
        fields = build_fields(FieldConfig(potential="x + y", vector_potential=["0", "x"]), grid)
        np.testing.assert_allclose(fields.potential, grid.coordinates().sum(axis=1))
        np.testing.assert_allclose(fields.vector_potential[1], grid.coordinates()[:, 0])
        assert build_fields(FieldConfig(), grid).vector_potential is None

    def test_vector_potential_needs_one_component_per_axis(self):
        with pytest.raises(ParameterError):
            build_fields(FieldConfig(vector_potential=["x"]), Grid.centered(2, 4, 0.5))

    def test_potential_table(self, tmp_path):
        grid = Grid.centered(1, 4, 1.0)
        path = tmp_path / "v.txt"
        path.write_text("# V\n1\n2\n3\n4\n")
        fields = build_fields(FieldConfig(potential_table=str(path)), grid)
        np.testing.assert_allclose(fields.potential, [1, 2, 3, 4])
        path.write_text("1\n2\n")
        with pytest.raises(ValueError):
            build_fields(FieldConfig(potential_table=str(path)), grid)

    @pytest.mark.parametrize("kind,params,at_one", [
        (MultiplierKind.CONSTANT, {"c": 2.0}, 2.0),
        (MultiplierKind.HEAT, {"t": 1.0}, np.exp(-1.0)),
        (MultiplierKind.FRACTIONAL, {"theta": 0.5}, 1.0),
        (MultiplierKind.INDICATOR_BAND, {"lower": 0.5, "upper": 2.0}, 1.0),
        (MultiplierKind.SMOOTHED_INDICATOR, {"radius": 1.0}, 1.0),
    ])
    def test_multiplier_kinds(self, kind, params, at_one):
        g = build_multiplier(MultiplierConfig(kind=kind, params=params))
        assert g.kind == kind
        assert g(np.array([1.0]))[0] == pytest.approx(at_one)

    def test_custom_table_multiplier(self, tmp_path):
        path = tmp_path / "g.txt"
        path.write_text("0 1 0\n2 0 1\n")
        g = build_multiplier(MultiplierConfig(kind=MultiplierKind.CUSTOM_TABLE, table=str(path)))
        assert g(np.array([1.0]))[0] == pytest.approx(0.5 + 0.5j)
        assert not g.real_valued

    def test_custom_needs_table(self):
        with pytest.raises(ValueError):
            MultiplierConfig(kind=MultiplierKind.CUSTOM_TABLE)

    def test_power_weight(self):
        grid = Grid.centered(1, 5, 0.5)
        w = build_weight(WeightConfig(kind="power", alpha=1.0), grid)
        np.testing.assert_allclose(w.values, [1.0, 0.5, 0.25, 0.5, 1.0])
        assert w.label == "|x|^1"
        assert build_weight(WeightConfig(), grid).sup == 1.0
