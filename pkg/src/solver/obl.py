"""
Opposition-based two-start annealing localizer.

A random start and its opposite point in the search box are annealed
independently; the branch that ends on the lower ML cost is the estimate.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import logging

import numpy as np
import pandas as pd

from src.baselines.lls import lls_estimate
from src.model.geometry import Bounds, Position
from src.model.scenario import MeasurementSet, Scenario, check_measurements
from src.solver.annealing import TracePoint, anneal
from src.solver.config import INIT_LLS, SaaConfig
from src.utils.errors import DegenerateGeometryError, ResultIOError
from src.utils.helpers import ensure_parent_directory

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["branch", "iteration", "x1", "x2", "cost", "temperature"]


class Branch(str, Enum):
    ORIGINAL = "original"
    OPPOSING = "opposing"


@dataclass
class SolveReport:
    """
    Outcome of ``localize``.

    Attributes:
        estimate: Position of the winning branch
        cost: ML cost at the estimate, min(branch_costs)
        winning_branch: Which start produced the estimate
        branch_costs: Final costs of the (original, opposing) branches
        branch_estimates: Final positions of the (original, opposing) branches
        trace: Per-branch anneal traces when requested
    """

    estimate: Position
    cost: float
    winning_branch: Branch
    branch_costs: Tuple[float, float]
    branch_estimates: Tuple[Position, Position]
    trace: Optional[Dict[Branch, List[TracePoint]]] = field(default=None, repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "estimate": self.estimate.to_list(),
            "cost": self.cost,
            "winning_branch": self.winning_branch.value,
            "branch_costs": list(self.branch_costs),
            "branch_estimates": [p.to_list() for p in self.branch_estimates],
        }

    def trace_frame(self) -> pd.DataFrame:
        rows = []
        for branch, points in (self.trace or {}).items():
            rows.extend([branch.value, *point] for point in points)
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)


def random_initial(bounds: Bounds, rng: np.random.Generator) -> Position:
    """Uniform point in the box: r * (x_max - x_min) + x_min, r ~ U[0, 1]^2."""
    r = rng.random(2)
    xy = bounds.clip(r * bounds.span + bounds.lower)
    return Position(float(xy[0]), float(xy[1]))


def oppose(x: Position, bounds: Bounds) -> Position:
    """
    Opposite point x_max + x_min - x, clamped to the bounds.

    Rounding can push the raw opposite past a bound (0.7 + 0.1 - 0.7 < 0.1).
    """
    xy = bounds.clip(bounds.upper + bounds.lower - x.as_array())
    return Position(float(xy[0]), float(xy[1]))


def branch_streams(key: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent streams for the original and opposing branches, derived from ``key``."""
    return tuple(np.random.default_rng(np.random.SeedSequence([key, branch_id])) for branch_id in (0, 1))


def initial_solution(scenario: Scenario, meas: MeasurementSet, config: SaaConfig,
                     rng: np.random.Generator) -> Position:
    """
    Original start of the search.

    With ``init='lls'`` the linear least-squares fix, clamped to the bounds,
    is used; degenerate layouts fall back to a random start.
    """
    if config.init == INIT_LLS:
        try:
            guess = lls_estimate(scenario, meas).as_array()
            xy = scenario.bounds.clip(guess)
            return Position(float(xy[0]), float(xy[1]))
        except DegenerateGeometryError:
            logger.debug("LLS start unavailable on this layout, using a random start")
    return random_initial(scenario.bounds, rng)


def localize(
    scenario: Scenario,
    meas: MeasurementSet,
    config: SaaConfig,
    rng: Optional[np.random.Generator] = None,
    record_trace: bool = False,
) -> SolveReport:
    """
    Estimate the target position from one set of RSS readings.

    Args:
        scenario: Anchors, path-loss parameters, and bounds
        meas: One reading per anchor
        config: Solver knobs
        rng: Random stream; ``config.seed`` seeds a fresh one when omitted
        record_trace: Keep every iteration of both branches in the report

    Returns:
        SolveReport of the lower-cost branch; exact ties go to the original branch
    """
    check_measurements(scenario, meas)
    if rng is None:
        rng = np.random.default_rng(config.seed)

    original_start = initial_solution(scenario, meas, config, rng)
    opposing_start = oppose(original_start, scenario.bounds)
    original_rng, opposing_rng = branch_streams(int(rng.integers(0, 2 ** 63 - 1)))

    traces: Dict[Branch, List[TracePoint]] = {Branch.ORIGINAL: [], Branch.OPPOSING: []}
    original, original_cost = anneal(
        original_start, scenario, meas, config, original_rng,
        trace=traces[Branch.ORIGINAL] if record_trace else None,
    )
    opposing, opposing_cost = anneal(
        opposing_start, scenario, meas, config, opposing_rng,
        trace=traces[Branch.OPPOSING] if record_trace else None,
    )

    if opposing_cost < original_cost:
        winner, estimate, cost = Branch.OPPOSING, opposing, opposing_cost
    else:
        winner, estimate, cost = Branch.ORIGINAL, original, original_cost

    return SolveReport(
        estimate=estimate,
        cost=cost,
        winning_branch=winner,
        branch_costs=(original_cost, opposing_cost),
        branch_estimates=(original, opposing),
        trace=traces if record_trace else None,
    )


def localize_single(
    scenario: Scenario,
    meas: MeasurementSet,
    config: SaaConfig,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Position, float]:
    """
    Annealing from the original start only, without the opposite point.

    Uses the same stream layout as ``localize``, so on a shared stream the
    result equals the original branch of the two-start solver.
    """
    check_measurements(scenario, meas)
    if rng is None:
        rng = np.random.default_rng(config.seed)
    start = initial_solution(scenario, meas, config, rng)
    original_rng, _ = branch_streams(int(rng.integers(0, 2 ** 63 - 1)))
    return anneal(start, scenario, meas, config, original_rng)


def write_trace_csv(report: SolveReport, path: str) -> None:
    """Write the report's anneal trace as ``branch,iteration,x1,x2,cost,temperature`` rows."""
    ensure_parent_directory(path)
    try:
        report.trace_frame().to_csv(path, index=False)
    except OSError as e:
        raise ResultIOError(path, e.strerror or str(e)) from e
