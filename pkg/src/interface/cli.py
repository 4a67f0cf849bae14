"""
Command-line interface for RSS localization with opposition-based annealing.

Exit codes: 0 success, 2 input/validation error, 3 numerical/geometry
error, 4 I/O error.
"""
from typing import List, Optional

import argparse
import logging
import os
import sys

from colorama import Fore, Style

# Add parent directory to path to allow imports from other project modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from src.interface.commands import CommandHandler
from src.utils.errors import (
    GeometryError,
    InputValidationError,
    LocalizationError,
    ResultIOError,
    SweepError,
)
from src.utils.helpers import DEFAULT_CONFIG_PATH, load_config, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GEOMETRY = 3
EXIT_IO = 4

DEFAULT_SEED = 42

DEFAULTS_HELP = """
Model and solver defaults (recommended operating point):
  P0 = 10 dB, gamma = 3, d0 = 1 m, area [0,40] x [0,40] m,
  epsilon = 0.9, lambda = 0.4, n_max = 500, sigma = 2 dB, N = 10.
All randomness comes from --seed (default 42).
"""


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the documented exit code."""
    if isinstance(error, SweepError) and error.cause is not None:
        return exit_code_for(error.cause)
    if isinstance(error, (ResultIOError, OSError)) and not isinstance(error, InputValidationError):
        return EXIT_IO
    if isinstance(error, GeometryError):
        return EXIT_GEOMETRY
    return EXIT_INPUT


def seed_value(text: str) -> int:
    """argparse type for --seed: a non-negative integer."""
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"seed must be non-negative, got {value}")
    return value


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=seed_value, default=DEFAULT_SEED, help="random seed (default: %(default)s)")
    parser.add_argument("--config", help="solver config JSON (epsilon, lambda, n_max, k, t0_policy, seed, init, step_schedule)")


def _add_experiment(parser: argparse.ArgumentParser, trials: Optional[int] = None) -> None:
    parser.add_argument("--trials", type=int, default=trials,
                        help="Monte-Carlo trials per setting (default: from the defaults file)")
    parser.add_argument("--jobs", type=int, default=None, help="parallel trial workers (default: 1)")
    parser.add_argument("--no-progress", dest="progress", action="store_false", help="hide progress bars")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oblsaa",
        description="RSS-based target localization with opposition-based simulated annealing.",
        epilog=DEFAULTS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--defaults", default=DEFAULT_CONFIG_PATH, help="project defaults YAML")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_const", const=1, dest="verbosity", default=0)
    verbosity.add_argument("-q", "--quiet", action="store_const", const=-1, dest="verbosity")
    subparsers = parser.add_subparsers(dest="command", required=True)

    localize = subparsers.add_parser("localize", help="estimate one target position",
                                     epilog=DEFAULTS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    localize.add_argument("scenario", help="scenario JSON (anchors, params, bounds)")
    localize.add_argument("measurements", nargs="?", help="measurements JSON array, one dB value per anchor")
    localize.add_argument("--simulate", action="store_true", help="simulate readings instead of reading a file")
    localize.add_argument("--target", help="true target x,y for --simulate")
    localize.add_argument("--trace", help="write the anneal trace CSV here")
    _add_common(localize)

    sweep = subparsers.add_parser("sweep", help="RMSE versus sigma or N",
                                  epilog=DEFAULTS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sweep.add_argument("--vary", choices=["sigma", "n"], required=True, help="quantity to sweep")
    sweep.add_argument("--values", required=True, help="comma-separated, strictly increasing values")
    sweep.add_argument("--out", required=True, help="sweep CSV destination")
    sweep.add_argument("--json", help="also write the JSON form here")
    sweep.add_argument("--trials-out", help="also write one CSV row per trial here")
    sweep.add_argument("--comparators", default="lls,crlb",
                       help="comma list from saa,lls,grid_oracle,crlb (default: %(default)s)")
    sweep.add_argument("--sigma", type=float, help="fixed sigma when varying n (default: 2)")
    sweep.add_argument("--anchors", type=int, help="fixed N when varying sigma (default: 10)")
    _add_common(sweep)
    _add_experiment(sweep)

    tune = subparsers.add_parser("tune", help="solver parameter study (N=10, sigma=2)",
                                 epilog=DEFAULTS_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    tune.add_argument("table", choices=["epsilon", "lambda", "n_max"], help="parameter to vary")
    _add_common(tune)
    _add_experiment(tune)

    oracle = subparsers.add_parser("oracle-compare", help="solver cost versus the grid oracle")
    oracle.add_argument("--anchors", type=int, default=10, help="anchor count (default: %(default)s)")
    oracle.add_argument("--sigma", type=float, default=2.0, help="noise std in dB (default: %(default)s)")
    oracle.add_argument("--resolution", type=float, default=0.4, help="oracle pitch in m (default: %(default)s)")
    oracle.add_argument("--refine-levels", type=int, default=2, help="oracle refinements (default: %(default)s)")
    oracle.add_argument("--out", help="per-trial CSV destination")
    _add_common(oracle)
    _add_experiment(oracle, trials=200)

    surface = subparsers.add_parser("surface", help="dump the ML cost on a lattice")
    surface.add_argument("scenario", help="scenario JSON")
    surface.add_argument("measurements", help="measurements JSON")
    surface.add_argument("--pitch", type=float, default=0.4, help="lattice pitch in m (default: %(default)s)")
    surface.add_argument("--out", required=True, help="surface CSV destination")

    return parser


class LocalizationCLI:
    """
    Thin sequential shell: parse arguments, run one subcommand, map errors to exit codes.
    """

    def __init__(self, stdout=None, stderr=None):
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.parser = build_parser()

    def report_error(self, error: BaseException) -> None:
        self.stderr.write(f"{Fore.RED}error:{Style.RESET_ALL} {error}\n")

    def run(self, argv: Optional[List[str]] = None) -> int:
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_INPUT if e.code not in (0, None) else EXIT_OK

        setup_logging(args.verbosity)
        config = load_config(args.defaults)
        handler = CommandHandler(config, stdout=self.stdout)
        try:
            return handler.process_command(args)
        except (LocalizationError, OSError) as e:
            logger.debug("command failed", exc_info=True)
            self.report_error(e)
            return exit_code_for(e)


def main(argv: Optional[List[str]] = None) -> int:
    return LocalizationCLI().run(argv)


if __name__ == "__main__":
    sys.exit(main())
