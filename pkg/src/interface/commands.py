"""
Subcommand handlers for the command-line interface.

Each handler takes the parsed argparse namespace, writes its data to
stdout (JSON or CSV) or to the requested files, and returns an exit code.
Errors are raised as toolkit exceptions; the CLI maps them to exit codes.
"""
from typing import Any, Callable, Dict, Optional, TextIO

import argparse
import json
import logging
import os
import sys

import numpy as np

from src.baselines.grid_oracle import GridSpec, cost_surface, write_surface_csv
from src.experiments.export import ExportFormat, export_results, export_trials, results_frame
from src.experiments.harness import oracle_comparison, rmse, run_sweep
from src.experiments.spec import SETTING_N, ExperimentSpec, parse_comparators, sweep_values
from src.experiments.tuning import tune, tuning_spec
from src.model.geometry import Position
from src.model.scenario import check_measurements, generate_measurements, load_measurements, load_scenario
from src.solver.config import SaaConfig
from src.solver.obl import localize, write_trace_csv
from src.utils.errors import InputValidationError, ResultIOError
from src.utils.helpers import ensure_parent_directory, load_json_file

logger = logging.getLogger(__name__)


def parse_point(text: str) -> Position:
    """Parse ``x,y`` into a Position."""
    try:
        return Position.from_sequence([float(v) for v in text.split(",")])
    except ValueError as e:
        raise InputValidationError(f"expected a point as x,y, got {text!r}") from e


def require_file(path: Optional[str], what: str) -> None:
    if path is not None and not os.path.isfile(path):
        raise InputValidationError(f"{what} file not found: {path}")


def require_writable(path: Optional[str]) -> None:
    """Fail before any work if ``path`` cannot be created."""
    if path is None:
        return
    ensure_parent_directory(path)
    directory = os.path.dirname(os.path.abspath(path))
    if os.path.isdir(path) or not os.access(directory, os.W_OK):
        raise ResultIOError(path, "destination is not writable")


class CommandHandler:
    """Dispatches a parsed subcommand to its handler."""

    def __init__(self, config: Dict[str, Any], stdout: TextIO = None):
        self.config = config
        self.stdout = stdout or sys.stdout
        self.commands: Dict[str, Callable[[argparse.Namespace], int]] = {
            'localize': self.localize,
            'sweep': self.sweep,
            'tune': self.tune,
            'oracle-compare': self.oracle_compare,
            'surface': self.surface,
        }

    def process_command(self, args: argparse.Namespace) -> int:
        """Run the handler for ``args.command`` and return its exit code."""
        if args.command not in self.commands:
            raise InputValidationError(f"unknown command {args.command!r}")
        return self.commands[args.command](args)

    def _solver_config(self, args: argparse.Namespace) -> SaaConfig:
        defaults = SaaConfig.from_dict(self.config.get("solver", {}))
        config = defaults
        if getattr(args, "config", None):
            config = SaaConfig.from_dict(load_json_file(args.config), defaults=defaults)
        return config.with_overrides(seed=args.seed)

    def _experiment(self, args: argparse.Namespace, **overrides) -> ExperimentSpec:
        spec = ExperimentSpec.from_config(self.config)
        values = dict(master_seed=args.seed, solver=self._solver_config(args))
        if getattr(args, "trials", None) is not None:
            values["trials"] = args.trials
        if getattr(args, "jobs", None) is not None:
            values["n_jobs"] = args.jobs
        values.update(overrides)
        return spec.with_overrides(**values)

    def _print(self, text: str) -> None:
        self.stdout.write(text if text.endswith("\n") else text + "\n")

    def localize(self, args: argparse.Namespace) -> int:
        """Solve one instance and print the SolveReport as JSON."""
        require_file(args.scenario, "scenario")
        require_file(args.measurements, "measurements")
        require_file(args.config, "solver config")
        require_writable(args.trace)
        if args.simulate == (args.measurements is not None):
            raise InputValidationError("give either a measurements file or --simulate with --target")
        if args.simulate and args.target is None:
            raise InputValidationError("--simulate needs --target x,y")

        scenario = load_scenario(args.scenario)
        config = self._solver_config(args)
        noise_seed, solver_seed = np.random.SeedSequence(config.seed).spawn(2)

        truth = None
        if args.simulate:
            truth = parse_point(args.target)
            meas = generate_measurements(scenario, truth, np.random.default_rng(noise_seed))
        else:
            meas = load_measurements(args.measurements)
            check_measurements(scenario, meas)

        report = localize(scenario, meas, config, np.random.default_rng(solver_seed),
                          record_trace=args.trace is not None)
        output = report.to_dict()
        if truth is not None:
            output["truth"] = truth.to_list()
            output["error_m"] = truth.distance_to(report.estimate)
            output["measurements"] = meas.to_list()
        if args.trace:
            write_trace_csv(report, args.trace)
        self._print(json.dumps(output, indent=2))
        return 0

    def sweep(self, args: argparse.Namespace) -> int:
        """Run an RMSE sweep over sigma or N and write CSV/JSON."""
        require_file(args.config, "solver config")
        for path in (args.out, args.json, args.trials_out):
            require_writable(path)

        values = sweep_values(args.values, integer=args.vary == SETTING_N)
        overrides: Dict[str, Any] = {"comparators": parse_comparators(args.comparators.split(","))}
        if args.vary == SETTING_N:
            overrides["n_anchors"] = tuple(values)
            if args.sigma is not None:
                overrides["sigma"] = args.sigma
        else:
            overrides["sigma"] = tuple(values)
            if args.anchors is not None:
                overrides["n_anchors"] = args.anchors
        spec = self._experiment(args, **overrides)

        trials = [] if args.trials_out else None
        results = run_sweep(spec, progress=args.progress, keep_trials=trials)
        export_results(results, ExportFormat.CSV, args.out)
        if args.json:
            export_results(results, ExportFormat.JSON, args.json)
        if args.trials_out:
            export_trials(trials, args.trials_out)

        table = results_frame(results).drop(columns=["setting_name"])
        self._print(table.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
        return 0

    def tune(self, args: argparse.Namespace) -> int:
        """Reproduce one solver parameter table and print it as CSV."""
        require_file(args.config, "solver config")
        base = self._experiment(args)
        spec = tuning_spec(base.trials, args.seed, base)
        table = tune(args.table, spec, progress=args.progress)
        self._print(table.to_csv(index=False))
        return 0

    def oracle_compare(self, args: argparse.Namespace) -> int:
        """Compare solver costs with the grid oracle trial by trial."""
        require_file(args.config, "solver config")
        require_writable(args.out)
        spec = self._experiment(
            args,
            n_anchors=args.anchors,
            sigma=args.sigma,
            grid=GridSpec(args.resolution, args.refine_levels),
        )
        table = oracle_comparison(spec, progress=args.progress)
        if args.out:
            try:
                table.to_csv(args.out, index=False)
            except OSError as e:
                raise ResultIOError(args.out, e.strerror or str(e)) from e
        summary = {
            "trials": int(len(table)),
            "within_tolerance_share": float(table["within_tolerance"].mean()),
            "localize_rmse_m": rmse(table["localize_error_m"]),
            "oracle_rmse_m": rmse(table["oracle_error_m"]),
        }
        self._print(json.dumps(summary, indent=2))
        return 0

    def surface(self, args: argparse.Namespace) -> int:
        """Dump the ML cost on a lattice as x1,x2,cost rows."""
        require_file(args.scenario, "scenario")
        require_file(args.measurements, "measurements")
        require_writable(args.out)
        if not args.pitch > 0:
            raise InputValidationError(f"--pitch must be positive, got {args.pitch}")
        scenario = load_scenario(args.scenario)
        meas = load_measurements(args.measurements)
        write_surface_csv(cost_surface(scenario, meas, args.pitch), args.out)
        return 0
