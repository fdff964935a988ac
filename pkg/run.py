#!/usr/bin/env python3
"""
Command-line entry point of the Spectral Multiplier Lab
Usage:
    python run.py run --config configs/all.yaml --out reports/all.csv --jobs 4
    python run.py list-experiments
    python run.py check-cutoffs

Exit code is 0 iff every row passes.
"""
import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from src.config import load_experiments, settings
from src.models.experiment import ExperimentId
from src.pipeline import ExperimentPipeline
from src.services.norm_service import MultiplierNormService
from src.services.report_service import ReportFormat
from src.utils.exceptions import SpectralLabError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectral-lab",
                                     description="Verification experiments for spectral multipliers on lattices")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run the experiments of a YAML document")
    run.add_argument("--config", required=True, help="Experiment document")
    run.add_argument("--out", default=None, help="Report path (timestamped file in REPORT_DIR when omitted)")
    run.add_argument("--format", choices=[f.value for f in ReportFormat], default=ReportFormat.CSV.value)
    run.add_argument("--jobs", type=int, default=1, help="Experiments run concurrently")
    run.add_argument("--no-timings", action="store_true", help="Write runtime_ms = 0 for byte-identical reports")

    commands.add_parser("list-experiments", help="List E1-E8")
    commands.add_parser("check-cutoffs", help="Run the dyadic partition self-test")
    return parser


def run_command(args: argparse.Namespace) -> int:
    try:
        configs = load_experiments(args.config)
    except (ValueError, OSError) as e:
        # ParameterError is a ValueError: hypotheses are checked while loading
        logger.error(f"Cannot run {args.config}: {e}")
        return 1
    if args.out is None and len(configs) == 1 and configs[0].output:
        args.out = configs[0].output
    timings = False if args.no_timings else settings.REPORT_TIMINGS
    pipeline = ExperimentPipeline(jobs=args.jobs, timings=timings)
    state = asyncio.run(pipeline.run(configs, out=args.out, fmt=ReportFormat(args.format),
                                     config_path=args.config))
    if state.report_path:
        print(state.report_path)
    return 0 if state.all_passed and state.report_path else 1


def list_command() -> int:
    for experiment in ExperimentId:
        print(f"{experiment.value}  {experiment.description}")
    return 0


def check_cutoffs_command() -> int:
    try:
        MultiplierNormService().make_cutoffs()
    except SpectralLabError as e:
        logger.error(str(e))
        print("cutoff self-test FAILED")
        return 1
    print("cutoff self-test passed")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_command(args)
    if args.command == "list-experiments":
        return list_command()
    return check_cutoffs_command()


if __name__ == "__main__":
    sys.exit(main())
