#!/usr/bin/env python
"""
rtctimes - exact execution-time regions for periodic real-time tasks

Command-line front end with the full analysis set:
- FP and EDF schedulability checks with witnesses and slack
- Region export (constraint CSV, SVG for two tasks)
- Minimal EDF deadline sets and linear-reward optimization
- Preemptive schedule simulation as a brute-force oracle
- The randomized |D_min| versus hyperperiod experiment
"""

import argparse
import logging
import os
import sys
from fractions import Fraction
from typing import IO, List, Optional

from dotenv import load_dotenv

from utils.edf_analysis import edf_region, edf_schedulable, minimal_deadlines
from utils.errors import RtcTimesError, TaskSetError
from utils.experiment import DEADLINE_RULES, ExperimentConfig, ExperimentRunner
from utils.formatters import (
    format_edf_verdict, format_fp_optimum, format_fp_verdict, format_lp_outcome, format_minimal,
    format_points_report, format_simulation, write_constraint_csv, write_density_csv, write_envelope_csv,
    write_experiment_csv, write_region_svg, write_scatter_svg, write_trace_csv
)
from utils.fp_analysis import POINT_SOURCES, fp_check, fp_region, lehoczky_points, reduced_points
from utils.optimizer import DEFAULT_SELECTION_LIMIT, max_reward_edf, max_reward_fp
from utils.parser import load_task_file, parse_rational, parse_weights, render_rational
from utils.simulator import POLICIES, response_times, simulate
from utils.task_model import DEADLINE_MODELS, TaskSet, is_dm_ordered, validate

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
DEFAULT_HORIZON_CAP = Fraction(1000000)

logger = logging.getLogger("rtctimes")


def configure_logging(level: str = "WARNING", log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers)
    logger.setLevel(level)


class RtcTimesApp:
    """The rtctimes commands; each cmd_* returns the process exit status."""

    def __init__(
            self,
            horizon_cap: Fraction = DEFAULT_HORIZON_CAP,
            workers: int = 1,
            selection_limit: int = DEFAULT_SELECTION_LIMIT,
            out: Optional[IO[str]] = None,
            err: Optional[IO[str]] = None
    ):
        self.horizon_cap = horizon_cap
        self.workers = workers
        self.selection_limit = selection_limit
        self.out = out or sys.stdout
        self.err = err or sys.stderr

    def say(self, text: str) -> None:
        print(text, file=self.out)

    def load(self, path: str, deadline_model: Optional[str] = None) -> TaskSet:
        """Read and validate a task file; validation problems become a TaskSetError."""
        ts = load_task_file(path, deadline_model)
        report = validate(ts)
        if not report.valid:
            raise TaskSetError("; ".join(report.violations))
        if not report.dm_ordered:
            logger.info(f"{path}: priorities are not deadline-monotonic")
        return ts

    def dispatch(self, args: argparse.Namespace) -> int:
        handler = getattr(self, f"cmd_{args.command}")
        try:
            return handler(args)
        except RtcTimesError as e:
            logger.error(f"Error in {args.command}: {e}")
            print(f"❌ {e}", file=self.err)
            return 2
        except Exception as e:
            logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
            print(f"❌ Unexpected error: {e}", file=self.err)
            return 2

    # --- Command handlers ---

    def cmd_check(self, args: argparse.Namespace) -> int:
        ts = self.load(args.file, args.deadline_model)
        if args.policy == "edf":
            verdict = edf_schedulable(ts)
            self.say(format_edf_verdict(verdict))
        else:
            verdict = fp_check(ts, point_source=args.points)
            self.say(format_fp_verdict(verdict))
        return 0 if verdict.schedulable else 1

    def cmd_points(self, args: argparse.Namespace) -> int:
        ts = self.load(args.file, args.deadline_model)
        lehoczky = [lehoczky_points(ts, i) for i in range(1, ts.n + 1)]
        reduced = [reduced_points(ts, i) for i in range(1, ts.n + 1)] if is_dm_ordered(ts) else None
        self.say(format_points_report(lehoczky, reduced))
        return 0

    def cmd_region(self, args: argparse.Namespace) -> int:
        ts = self.load(args.file, args.deadline_model)
        if args.policy == "edf":
            region = edf_region(ts, minimal=args.minimal)
            rows = list(region.rows)
            summary = f"✅ EDF region: {len(rows)} rows"
        else:
            region = fp_region(ts, args.points)
            rows = list(region.rows)
            summary = f"✅ FP region: {len(rows)} rows in {len(region.groups)} groups"

        if args.out:
            write_constraint_csv(rows, args.out)
        else:
            write_constraint_csv(rows, self.out)
        if args.svg:
            write_region_svg(region, args.svg, title=os.path.basename(args.file))
        self.say(summary)
        return 0

    def cmd_minimize(self, args: argparse.Namespace) -> int:
        ts = self.load(args.file, args.deadline_model)
        minimal = minimal_deadlines(ts)
        self.say(format_minimal(minimal))
        if args.out:
            write_constraint_csv(minimal.rows, args.out)
        return 0

    def cmd_optimize(self, args: argparse.Namespace) -> int:
        ts = self.load(args.file, args.deadline_model)
        weights = parse_weights(args.weights)
        if args.policy == "edf":
            outcome = max_reward_edf(ts, weights, minimal=not args.full_rows)
            self.say(format_lp_outcome(outcome))
        else:
            optimum = max_reward_fp(ts, weights, args.points, self.selection_limit)
            outcome = optimum.outcome
            self.say(format_fp_optimum(optimum))
        return 0 if outcome.is_optimal else 1

    def cmd_simulate(self, args: argparse.Namespace) -> int:
        ts = self.load(args.file, args.deadline_model)
        horizon = parse_rational(args.horizon) if args.horizon else None
        trace = simulate(ts, policy=args.policy, horizon=horizon, horizon_cap=self.horizon_cap)
        if args.out:
            write_trace_csv(trace, args.out)
        self.say(format_simulation(trace, response_times(trace)))
        return 1 if trace.missed else 0

    def cmd_experiment(self, args: argparse.Namespace) -> int:
        config = ExperimentConfig(
            task_count=args.tasks,
            period_lo=args.period_lo,
            period_hi=args.period_hi,
            deadline_rule=args.deadline_rule,
            sample_count=args.samples,
            seed=args.seed,
            output_path=args.out,
        )
        summary = ExperimentRunner(config, workers=self.workers).run()

        write_experiment_csv(summary.records, config.output_path or self.out)
        report = self.err if config.output_path is None else self.out
        write_envelope_csv(summary.buckets, args.envelope_out or report)
        if args.density_out:
            write_density_csv(summary.density, args.density_out)
        if args.svg:
            write_scatter_svg(summary.records, summary.buckets, args.svg,
                              title=f"n={config.task_count}, periods in [{config.period_lo}, {config.period_hi}]")

        print(f"✅ {len(summary.records)} instances (seed {config.seed}, deadlines {config.deadline_rule})", file=report)
        print(f"  fitted c = {summary.log_constant:.4f} (|D_min| <= c log2 H on every instance)", file=report)
        print(f"  largest bucket envelope / |D| = {summary.largest_bucket_ratio:.4f}", file=report)
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtctimes", description="Exact FP/EDF execution-time regions")
    parser.add_argument('--debug', action='store_true', help='Enable debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    def with_file(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument('file', help='Task-set JSON file')
        cmd.add_argument('--deadline-model', choices=DEADLINE_MODELS, help='Override the file deadline model')
        return cmd

    def with_policy(cmd: argparse.ArgumentParser) -> None:
        cmd.add_argument('--policy', type=str.lower, choices=POLICIES, default='fp', help='Scheduling policy')
        cmd.add_argument('--points', choices=POINT_SOURCES, default='lehoczky', help='FP schedulability point set')

    check = with_file('check', 'Exact schedulability test for the file execution times')
    with_policy(check)

    with_file('points', 'Compare full and reduced FP schedulability point sets')

    region = with_file('region', 'Dump the schedulability region as constraint rows')
    with_policy(region)
    region.add_argument('--minimal', action='store_true', help='EDF: keep only the D_min rows')
    region.add_argument('--out', help='Constraint CSV path (default: stdout)')
    region.add_argument('--svg', help='SVG polygon path (two tasks only)')

    minimize = with_file('minimize', 'Minimal EDF deadline set D_min')
    minimize.add_argument('--out', help='CSV path for the retained rows')

    optimize = with_file('optimize', 'Maximize a linear reward over the region')
    with_policy(optimize)
    optimize.add_argument('-w', '--weights', required=True, help='Comma-separated weights, e.g. 0,1')
    optimize.add_argument('--full-rows', action='store_true', help='EDF: solve over every deadline row')

    simulate_cmd = with_file('simulate', 'Simulate the synchronous schedule')
    simulate_cmd.add_argument('--policy', type=str.lower, choices=POLICIES, default='fp', help='Scheduling policy')
    simulate_cmd.add_argument('--horizon', help='Simulation horizon (rational)')
    simulate_cmd.add_argument('--out', help='Trace CSV path')

    experiment = sub.add_parser('experiment', help='Randomized |D_min| versus hyperperiod experiment')
    experiment.add_argument('--tasks', type=int, default=2, help='Tasks per instance')
    experiment.add_argument('--period-lo', type=int, default=2, help='Smallest period')
    experiment.add_argument('--period-hi', type=int, default=50, help='Largest period')
    experiment.add_argument('--deadline-rule', choices=DEADLINE_RULES, default='uniform_1_to_T')
    experiment.add_argument('--samples', type=int, default=1000, help='Number of instances')
    experiment.add_argument('--seed', type=int, default=0, help='Random seed')
    experiment.add_argument('--out', help='Record CSV path (default: stdout)')
    experiment.add_argument('--envelope-out', help='Envelope CSV path')
    experiment.add_argument('--density-out', help='|D_min| density CSV path')
    experiment.add_argument('--svg', help='Scatter plot SVG path')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)

    try:
        level = 'DEBUG' if args.debug else os.getenv('RTCTIMES_LOG_LEVEL', 'WARNING').upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"unknown log level {level!r}")
        configure_logging(level, os.getenv('RTCTIMES_LOG_FILE'))
        horizon_cap = parse_rational(os.getenv('RTCTIMES_HORIZON_CAP', render_rational(DEFAULT_HORIZON_CAP)))
        workers = int(os.getenv('RTCTIMES_WORKERS', '1'))
        selection_limit = int(os.getenv('RTCTIMES_SELECTION_LIMIT', str(DEFAULT_SELECTION_LIMIT)))
    except (RtcTimesError, ValueError) as e:
        logger.critical(f"Invalid environment configuration: {e}")
        return 2

    app = RtcTimesApp(horizon_cap=horizon_cap, workers=workers, selection_limit=selection_limit)
    return app.dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
