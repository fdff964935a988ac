"""
Tests for the concurrent experiment pipeline and the report files it writes
"""
import pytest

from src.models.experiment import ExperimentConfig, ExperimentId, GridConfig, MultiplierConfig, ReportRow
from src.models.lattice import Boundary
from src.models.multiplier import MultiplierKind
from src.models.run_state import RunStatus
from src.pipeline import ExperimentPipeline, ExperimentRunner
from src.services.report_service import REPORT_COLUMNS, ReportFormat, ReportService
from src.utils.exceptions import ReportError
from src.utils.monitoring import ResourceMonitor


def small_configs():
    return [
        ExperimentConfig(
            experiment=ExperimentId.E2,
            grid=GridConfig(dim=1, n_points=16, length=8.0, boundary=Boundary.DIRICHLET),
            p_values=[2.0], y_values=[0.0], trials=3,
        ),
        ExperimentConfig(
            experiment=ExperimentId.E1,
            grid=GridConfig(dim=1, n_points=16, length=8.0, boundary=Boundary.PERIODIC),
            multiplier=MultiplierConfig(kind=MultiplierKind.CONSTANT, params={"c": 1.0}),
            p_values=[2.0, 4.0], times=[1.0], trials=3,
        ),
    ]


def make_pipeline(tmp_path, jobs=1):
    return ExperimentPipeline(jobs=jobs, runner=ExperimentRunner(timings=False),
                              report_service=ReportService(output_dir=str(tmp_path)),
                              monitor=ResourceMonitor(report_dir=str(tmp_path)))


class TestPipeline:

    async def test_reports_are_reproducible(self, tmp_path):
        first = await make_pipeline(tmp_path).run(small_configs(), out=str(tmp_path / "a.csv"))
        second = await make_pipeline(tmp_path).run(small_configs(), out=str(tmp_path / "b.csv"))
        assert first.all_passed and second.all_passed
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    async def test_rows_sorted_and_independent_of_jobs(self, tmp_path):
        serial = make_pipeline(tmp_path, jobs=1)
        parallel = make_pipeline(tmp_path, jobs=2)
        await serial.run(small_configs(), out=str(tmp_path / "serial.csv"))
        await parallel.run(small_configs(), out=str(tmp_path / "parallel.csv"))
        assert [row.sort_key for row in serial.rows] == sorted(row.sort_key for row in serial.rows)
        assert [row.experiment for row in serial.rows][0] == "E1"
        assert [(r.params, r.measured) for r in serial.rows] == [(r.params, r.measured) for r in parallel.rows]

    async def test_rejected_experiment(self, tmp_path):
        cfg = ExperimentConfig(experiment=ExperimentId.E6, grid=GridConfig(dim=2, n_points=6, length=3.0))
        state = await make_pipeline(tmp_path).run([cfg], out=str(tmp_path / "rejected.csv"))
        assert state.experiments[0].status == RunStatus.REJECTED
        assert state.experiments[0].error_type == "ParameterError"
        assert state.report_path is None
        assert not state.all_passed
        assert not (tmp_path / "rejected.csv").exists()

    async def test_partial_failure_keeps_other_rows(self, tmp_path):
        bad = ExperimentConfig(experiment=ExperimentId.E6, grid=GridConfig(dim=2, n_points=6, length=3.0))
        state = await make_pipeline(tmp_path).run([bad, *small_configs()], out=str(tmp_path / "mixed.csv"))
        assert state.count(RunStatus.REJECTED) == 1
        assert state.count(RunStatus.COMPLETED) == 2
        assert state.report_path == str(tmp_path / "mixed.csv")
        assert not state.all_passed

    async def test_timestamps_are_timezone_aware(self, tmp_path):
        state = await make_pipeline(tmp_path).run(small_configs(), out=str(tmp_path / "stamped.csv"))
        assert state.created_at.tzinfo is not None
        assert state.completed_at.tzinfo is not None
        assert state.get_duration() >= 0.0
        for experiment in state.experiments:
            assert experiment.started_at.tzinfo is not None
            assert experiment.get_duration() >= 0.0


class TestReportService:

    @pytest.fixture
    def rows(self):
        return [
            ReportRow(experiment="E1", params="p=2", measured=1.5, predicted=3.0, **{"pass": True}),
            ReportRow(experiment="E2", params="y=1", measured=2.0, passed=False),
        ]

    def test_ratio_filled(self, rows):
        assert rows[0].ratio == pytest.approx(0.5)
        assert rows[1].ratio is None
        assert rows[0].to_record()["pass"] is True

    def test_empty_report_rejected(self, tmp_path):
        with pytest.raises(ReportError):
            ReportService(output_dir=str(tmp_path)).emit_report([])

    def test_csv_layout(self, tmp_path, rows):
        path = ReportService().emit_report(rows, ReportFormat.CSV, str(tmp_path / "out" / "r.csv"))
        lines = open(path).read().splitlines()
        assert lines[0] == ",".join(REPORT_COLUMNS)
        assert len(lines) == 1 + len(rows)
        assert lines[1].startswith("E1,p=2,1.5,3.0,0.5,True")

    def test_json_round_trip(self, tmp_path, rows):
        service = ReportService(output_dir=str(tmp_path))
        path = service.emit_report(rows, ReportFormat.JSON, str(tmp_path / "r.json"))
        assert [row.to_record() for row in service.load_json(path)] == [row.to_record() for row in rows]

    def test_default_path_in_output_dir(self, tmp_path, rows):
        path = ReportService(output_dir=str(tmp_path)).emit_report(rows)
        assert path.startswith(str(tmp_path))
        assert path.endswith("_report.csv")

    def test_excel_sheets(self, tmp_path, rows):
        from openpyxl import load_workbook
        path = ReportService().emit_report(rows, ReportFormat.XLSX, str(tmp_path / "r.xlsx"))
        workbook = load_workbook(path)
        assert workbook.sheetnames == ["Summary", "Rows"]
        assert workbook["Rows"].cell(row=1, column=1).value == "experiment"
        assert workbook["Rows"].max_row == 1 + len(rows)


class TestPreflight:

    async def test_checks_recorded(self, tmp_path):
        monitor = ResourceMonitor(headroom_gb=0.0, report_dir=str(tmp_path / "reports"))
        assert await monitor.preflight(64)
        assert set(monitor.last_check_results) == {"report_disk", "memory_headroom", "dense_operator"}
        assert (tmp_path / "reports").is_dir()

    async def test_large_grid_falls_back_to_chebyshev(self, tmp_path):
        monitor = ResourceMonitor(headroom_gb=0.0, report_dir=str(tmp_path))
        await monitor.preflight(10 ** 6)
        result = monitor.last_check_results["dense_operator"]
        assert result["status"] == "pass"
        assert "Chebyshev" in result["message"]
