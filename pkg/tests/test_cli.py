"""
Tests for the command-line entry point
"""
import yaml

import run
from src.models.experiment import ExperimentId


def test_list_experiments(capsys):
    assert run.main(["list-experiments"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(ExperimentId) == 8
    assert lines[0].startswith("E1")


def test_check_cutoffs(capsys):
    assert run.main(["check-cutoffs"]) == 0
    assert "cutoff self-test passed" in capsys.readouterr().out


def test_bad_config_exits_nonzero(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"experiment": "E6", "grid": {"dim": 2, "n_points": 8, "length": 4.0}}))
    assert run.main(["run", "--config", str(path)]) == 1


def test_missing_config_exits_nonzero(tmp_path):
    assert run.main(["run", "--config", str(tmp_path / "absent.yaml")]) == 1


def test_run_writes_report(tmp_path, capsys):
    path = tmp_path / "small.yaml"
    path.write_text(yaml.safe_dump({
        "experiment": "E2",
        "grid": {"dim": 1, "n_points": 16, "length": 8.0, "boundary": "dirichlet"},
        "p_values": [2.0],
        "y_values": [0.0],
        "trials": 3,
    }))
    out = tmp_path / "reports" / "small.json"
    code = run.main(["run", "--config", str(path), "--out", str(out), "--format", "json", "--no-timings"])
    assert code == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out
