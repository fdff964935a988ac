"""
Experiment Pipeline
Runs a batch of experiment documents concurrently and writes one merged report
"""
import asyncio
import logging
import traceback
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import List, Optional, Sequence

from src.models.experiment import ExperimentConfig, ReportRow
from src.models.run_state import ExperimentState, RunState
from src.pipeline.experiments import ExperimentRunner
from src.services.report_service import ReportFormat, ReportService
from src.utils.exceptions import ParameterError, ReportError
from src.utils.helpers import create_run_id, format_duration
from src.utils.monitoring import ResourceMonitor, resource_monitor

logger = logging.getLogger(__name__)


class ExperimentPipeline:
    """
    Runs independent experiments on a thread pool

    Rows are merged in (experiment, params) order whatever order the jobs finish in.
    """

    def __init__(self, jobs: int = 1, timings: Optional[bool] = None,
                 runner: Optional[ExperimentRunner] = None,
                 report_service: Optional[ReportService] = None,
                 monitor: Optional[ResourceMonitor] = None):
        self.jobs = max(1, int(jobs))
        self.runner = runner or ExperimentRunner(timings=timings)
        self.report_service = report_service or ReportService()
        self.monitor = monitor or resource_monitor
        self.rows: List[ReportRow] = []

    async def run(self, configs: Sequence[ExperimentConfig], out: Optional[str] = None,
                  fmt: ReportFormat = ReportFormat.CSV, config_path: Optional[str] = None) -> RunState:
        """
        Run every experiment and emit the merged report

        Steps:
        1. Health checks
        2. Run experiments
        3. Merge rows
        4. Write report

        Args:
            configs: Validated experiment documents
            out: Report path; a timestamped file in the report directory when omitted
            fmt: csv, json or xlsx
            config_path: Source document, recorded in the run state

        Returns:
            RunState with per-experiment status and the report path
        """
        state = RunState(run_id=create_run_id("RUN"), config_path=config_path)
        logger.info("=" * 60)
        logger.info(f"Starting run {state.run_id} with {len(configs)} experiments on {self.jobs} workers")
        logger.info("=" * 60)

        logger.info("Step 1/4: Checking resources")
        largest = max((max([cfg.grid.n_points, *cfg.refinements]) ** cfg.grid.dim for cfg in configs), default=0)
        state.healthy = await self.monitor.preflight(largest)
        if not state.healthy:
            logger.warning("Health checks reported problems; continuing")

        logger.info(f"Step 2/4: Running {len(configs)} experiments")
        entries = [state.add(cfg.label, cfg.experiment.value) for cfg in configs]
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.jobs) as executor:
            results = await asyncio.gather(
                *[loop.run_in_executor(executor, self._run_one, cfg, entry) for cfg, entry in zip(configs, entries)],
                return_exceptions=True
            )

        logger.info("Step 3/4: Merging rows")
        rows: List[ReportRow] = []
        for entry, result in zip(entries, results):
            if isinstance(result, Exception):
                entry.set_error(result)
                logger.error(f"{entry.label} crashed outside its handler: {result}")
                continue
            rows.extend(result)
        self.rows = sorted(rows, key=lambda row: row.sort_key)

        logger.info("Step 4/4: Writing report")
        if self.rows:
            try:
                state.report_path = self.report_service.emit_report(self.rows, fmt, out)
            except ReportError as e:
                logger.error(f"Report not written: {e}")
        else:
            logger.error("No rows were produced; nothing to report")

        state.completed_at = datetime.now(timezone.utc)
        summary = state.to_summary_dict()
        logger.info(f"Run {state.run_id} finished: {summary['rows']}, "
                    f"{summary['failed']} failed, {summary['errors']} errors, {summary['rejected']} rejected "
                    f"in {format_duration(state.get_duration())}")
        logger.info("=" * 60)
        return state

    def _run_one(self, cfg: ExperimentConfig, entry: ExperimentState) -> List[ReportRow]:
        """Worker body: never raises, failures go into the experiment state"""
        entry.start()
        try:
            rows = self.runner.run_experiment(cfg)
            entry.finish(len(rows), sum(row.passed for row in rows))
            logger.info(f"{cfg.label} {entry.status} in {format_duration(entry.get_duration())}")
            return rows
        except ParameterError as e:
            entry.set_error(e, rejected=True)
            logger.error(f"{cfg.label} rejected: {e}")
        except Exception as e:
            entry.set_error(e)
            logger.error(f"{cfg.label} failed: {e}")
            logger.error(traceback.format_exc())
        return []
