"""
Monte-Carlo driver: random geometries, trial execution, and RMSE aggregation.

Every trial draws its randomness from a SeedSequence keyed on
(master_seed, setting, trial_index), so results do not depend on the
order or the process in which trials run.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import logging
import time

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from src.baselines.crlb import crlb_rmse
from src.baselines.grid_oracle import grid_oracle
from src.baselines.lls import lls_estimate
from src.experiments.spec import ExperimentSpec, Method, setting_key
from src.model.geometry import Bounds, Position
from src.model.scenario import Scenario, generate_measurements
from src.solver.obl import localize, localize_single
from src.utils.errors import EmptyAggregateError, LocalizationError, PlacementError, SweepError

logger = logging.getLogger(__name__)

# Child stream indices of a trial's SeedSequence; fixed so that enabling a
# comparator never shifts the streams of the others.
_GEOMETRY, _NOISE, _SOLVER = range(3)

# Oracle comparison tolerance: localize cost may exceed the oracle cost by this factor.
ORACLE_COST_RATIO = 1.05


@dataclass
class TrialRecord:
    """
    Everything measured in one Monte-Carlo trial.

    ``error`` is the distance between truth and the OBL_SAA estimate;
    comparator results are keyed by Method value.
    """

    trial_index: int
    setting: float
    truth: Position
    estimate: Position
    error: float
    cost: float
    winning_branch: str
    runtime: float
    comparator_errors: Dict[str, float] = field(default_factory=dict)
    comparator_costs: Dict[str, float] = field(default_factory=dict)
    comparator_runtimes: Dict[str, float] = field(default_factory=dict)
    crlb: Optional[float] = None

    def to_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "trial_index": self.trial_index,
            "setting": self.setting,
            "truth_x1": self.truth.x1,
            "truth_x2": self.truth.x2,
            "estimate_x1": self.estimate.x1,
            "estimate_x2": self.estimate.x2,
            "error_m": self.error,
            "cost": self.cost,
            "winning_branch": self.winning_branch,
            "runtime_s": self.runtime,
            "crlb_m": self.crlb,
        }
        for method, value in sorted(self.comparator_errors.items()):
            row[f"{method}_error_m"] = value
        for method, value in sorted(self.comparator_costs.items()):
            row[f"{method}_cost"] = value
        for method, value in sorted(self.comparator_runtimes.items()):
            row[f"{method}_runtime_s"] = value
        return row


@dataclass
class SweepResult:
    """
    Aggregates over all trials of one setting.

    Attributes:
        setting_name: ``sigma`` or ``n``
        setting_value: Value of the swept quantity
        rmse: RMSE per method (m)
        mean_crlb: Arithmetic mean of per-trial CRLB, when the CRLB was computed
        mean_runtime: Mean wall-clock time per method (s)
        trials: Number of trials aggregated
        opposing_win_rate: Share of trials where the opposing branch had strictly lower cost
    """

    setting_name: str
    setting_value: float
    rmse: Dict[str, float]
    mean_crlb: Optional[float]
    mean_runtime: Dict[str, float]
    trials: int
    opposing_win_rate: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepResult":
        return cls(**data)


def rmse(errors: Sequence[float]) -> float:
    """Root mean squared error."""
    values = np.asarray(list(errors), dtype=float)
    if values.size == 0:
        raise EmptyAggregateError("RMSE of an empty error sequence")
    return float(np.sqrt(np.mean(values * values)))


def trial_seed(spec: ExperimentSpec, setting: Union[int, float], trial_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([spec.master_seed, setting_key(setting), trial_index])


def place_nodes(area: Bounds, n_anchors: int, rng: np.random.Generator,
                min_separation: float = 0.1, max_attempts: int = 1000) -> Tuple[Tuple[Position, ...], Position]:
    """
    Draw anchors and a target independently uniform over ``area``.

    Draws with an anchor closer than ``min_separation`` to the target, or two
    coincident anchors, are rejected and redrawn.

    Raises:
        PlacementError: no acceptable draw within ``max_attempts``
    """
    lower, span = area.lower, area.span
    for _ in range(max_attempts):
        anchors = rng.random((n_anchors, 2)) * span + lower
        target = rng.random(2) * span + lower
        distances = np.hypot(*(anchors - target).T)
        if np.min(distances) < min_separation:
            continue
        if len(np.unique(anchors, axis=0)) < n_anchors:
            continue
        return (
            tuple(Position(float(a[0]), float(a[1])) for a in anchors),
            Position(float(target[0]), float(target[1])),
        )
    raise PlacementError(f"no valid placement of {n_anchors} anchors within {max_attempts} attempts")


def _timed(fn, *args):
    start = time.perf_counter()
    result = fn(*args)
    return result, time.perf_counter() - start


def run_trial(spec: ExperimentSpec, setting: Union[int, float], trial_index: int) -> TrialRecord:
    """
    Run one Monte-Carlo trial at ``setting``.

    Places the nodes, simulates readings, runs the solver (timed alone) and
    every enabled comparator.
    """
    n_anchors, sigma = spec.resolve(setting)
    children = trial_seed(spec, setting, trial_index).spawn(3)
    streams = [np.random.default_rng(child) for child in children]

    anchors, truth = place_nodes(
        spec.area, n_anchors, streams[_GEOMETRY], spec.min_separation, spec.max_placement_attempts
    )
    scenario = Scenario(anchors, spec.params.with_sigma(sigma), spec.area)
    meas = generate_measurements(scenario, truth, streams[_NOISE])

    report, runtime = _timed(localize, scenario, meas, spec.solver, streams[_SOLVER])
    record = TrialRecord(
        trial_index=trial_index,
        setting=float(setting),
        truth=truth,
        estimate=report.estimate,
        error=truth.distance_to(report.estimate),
        cost=report.cost,
        winning_branch=report.winning_branch.value,
        runtime=runtime,
    )

    if Method.SAA in spec.comparators:
        # Replays the solver stream, so the ablation shares the original branch's start and moves.
        saa_rng = np.random.default_rng(children[_SOLVER])
        (estimate, cost), elapsed = _timed(localize_single, scenario, meas, spec.solver, saa_rng)
        record.comparator_errors[Method.SAA.value] = truth.distance_to(estimate)
        record.comparator_costs[Method.SAA.value] = cost
        record.comparator_runtimes[Method.SAA.value] = elapsed
    if Method.LLS in spec.comparators:
        estimate, elapsed = _timed(lls_estimate, scenario, meas)
        record.comparator_errors[Method.LLS.value] = truth.distance_to(estimate)
        record.comparator_runtimes[Method.LLS.value] = elapsed
    if Method.GRID_ORACLE in spec.comparators:
        (estimate, cost), elapsed = _timed(grid_oracle, scenario, meas, spec.grid)
        record.comparator_errors[Method.GRID_ORACLE.value] = truth.distance_to(estimate)
        record.comparator_costs[Method.GRID_ORACLE.value] = cost
        record.comparator_runtimes[Method.GRID_ORACLE.value] = elapsed
    if Method.CRLB in spec.comparators:
        # The bound shrinks linearly with sigma and vanishes for noise-free readings.
        record.crlb = 0.0 if sigma == 0 else crlb_rmse(scenario, truth)

    return record


def _guarded_trial(spec: ExperimentSpec, setting: Union[int, float], trial_index: int) -> TrialRecord:
    try:
        return run_trial(spec, setting, trial_index)
    except LocalizationError as e:
        raise SweepError(setting, trial_index, e) from e


def run_trials(spec: ExperimentSpec, setting: Union[int, float], progress: bool = False) -> List[TrialRecord]:
    """All trials of one setting, in trial_index order."""
    tasks = (delayed(_guarded_trial)(spec, setting, i) for i in range(spec.trials))
    results = Parallel(n_jobs=spec.n_jobs, return_as="generator")(tasks)
    return list(tqdm(
        results,
        total=spec.trials,
        desc=f"{spec.setting_name}={setting}",
        unit="trial",
        disable=not progress,
        leave=False,
    ))


def summarize(spec: ExperimentSpec, setting: Union[int, float], records: Sequence[TrialRecord]) -> SweepResult:
    """Aggregate trial records of one setting into a SweepResult."""
    if not records:
        raise EmptyAggregateError(f"no trials to aggregate at {spec.setting_name}={setting}")

    methods = [Method.OBL_SAA.value] + sorted(records[0].comparator_errors)
    errors = {Method.OBL_SAA.value: [r.error for r in records]}
    runtimes = {Method.OBL_SAA.value: [r.runtime for r in records]}
    for method in methods[1:]:
        errors[method] = [r.comparator_errors[method] for r in records]
        runtimes[method] = [r.comparator_runtimes[method] for r in records]

    crlbs = [r.crlb for r in records if r.crlb is not None]
    opposing_wins = sum(1 for r in records if r.winning_branch == "opposing")
    return SweepResult(
        setting_name=spec.setting_name,
        setting_value=float(setting),
        rmse={m: rmse(errors[m]) for m in methods},
        mean_crlb=float(np.mean(crlbs)) if crlbs else None,
        mean_runtime={m: float(np.mean(runtimes[m])) for m in methods},
        trials=len(records),
        opposing_win_rate=opposing_wins / len(records),
    )


def run_sweep(spec: ExperimentSpec, progress: bool = False,
              keep_trials: Optional[List[TrialRecord]] = None) -> List[SweepResult]:
    """
    Run ``spec.trials`` trials at every setting and aggregate them.

    Args:
        spec: Experiment description
        progress: Show a progress bar on stderr
        keep_trials: If given, every TrialRecord is appended to it

    Raises:
        SweepError: a trial failed; names its setting and trial_index
    """
    results = []
    for setting in spec.settings():
        records = run_trials(spec, setting, progress)
        if keep_trials is not None:
            keep_trials.extend(records)
        result = summarize(spec, setting, records)
        logger.info(
            "%s=%g: RMSE %.3f m over %d trials (opposing wins %.1f%%)",
            spec.setting_name, setting, result.rmse[Method.OBL_SAA.value], result.trials,
            100.0 * result.opposing_win_rate,
        )
        results.append(result)
    return results


def oracle_comparison(spec: ExperimentSpec, setting: Optional[Union[int, float]] = None,
                      progress: bool = False) -> pd.DataFrame:
    """
    Per-trial costs of the solver against the grid oracle.

    Returns:
        One row per trial with ``localize_cost``, ``oracle_cost`` and
        ``within_tolerance`` (localize cost <= 1.05 x oracle cost, or below it)
    """
    spec = spec.with_overrides(comparators=spec.comparators | {Method.GRID_ORACLE})
    setting = spec.settings()[0] if setting is None else setting
    rows = []
    for record in run_trials(spec, setting, progress):
        oracle_cost = record.comparator_costs[Method.GRID_ORACLE.value]
        rows.append({
            "trial_index": record.trial_index,
            "localize_cost": record.cost,
            "oracle_cost": oracle_cost,
            "localize_error_m": record.error,
            "oracle_error_m": record.comparator_errors[Method.GRID_ORACLE.value],
            "within_tolerance": bool(
                record.cost <= oracle_cost + 1e-9 or record.cost <= ORACLE_COST_RATIO * oracle_cost
            ),
        })
    return pd.DataFrame(rows)

