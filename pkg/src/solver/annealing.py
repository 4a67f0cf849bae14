"""
Simulated annealing over the ML cost surface.

One branch of the solver: start from a point, propose uniform moves inside
a box that narrows as the run goes on, accept them by the Metropolis rule,
cool the temperature geometrically, and keep the best point visited.
"""
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import logging
import math
import sys

import numpy as np

from src.model.geometry import Bounds, Position
from src.model.scenario import MeasurementSet, Scenario, check_measurements, cost_at
from src.solver.config import STEP_CONSTANT, SaaConfig
from src.utils.errors import InputValidationError

logger = logging.getLogger(__name__)

# Last-iteration half-width as a fraction of the first under the shrinking schedule.
FINAL_STEP_RATIO = 1e-3


class TracePoint(NamedTuple):
    """One row of an anneal trace: the current point after an iteration."""

    iteration: int
    x1: float
    x2: float
    cost: float
    temperature: float


@dataclass
class AnnealState:
    """
    Mutable state of one annealing branch.

    ``current`` may sit uphill of ``best``; ``best_cost`` never exceeds the
    cost of the start point.
    """

    current: np.ndarray
    current_cost: float
    best: np.ndarray
    best_cost: float
    temperature: float
    step: np.ndarray
    iteration: int = 0

    @classmethod
    def start(cls, xy: np.ndarray, cost: float, temperature: float, step: np.ndarray) -> "AnnealState":
        return cls(xy.copy(), cost, xy.copy(), cost, temperature, step)

    def position(self) -> Position:
        return Position(float(self.best[0]), float(self.best[1]))


def acceptance_probability(delta: float, temperature: float, k: float = 1.0) -> float:
    """
    Metropolis acceptance probability of a move that changes the cost by ``delta``.

    Returns 1 for downhill or flat moves and exp(-delta / (k T)) otherwise,
    floored at the smallest normal float so the result stays in (0, 1].
    """
    if temperature <= 0 or k <= 0:
        raise InputValidationError(f"temperature and k must be positive, got T={temperature}, k={k}")
    if delta <= 0:
        return 1.0
    return max(math.exp(-delta / (k * temperature)), sys.float_info.min)


def step_size(bounds: Bounds, config: SaaConfig) -> np.ndarray:
    """Per-axis proposal half-width of the first iteration."""
    return config.lambda_ * bounds.span


def step_schedule(bounds: Bounds, config: SaaConfig) -> np.ndarray:
    """
    Per-axis proposal half-widths of a whole run, shape (n_max, 2).

    The shrinking schedule decays geometrically from ``lambda_ * span`` at the
    first iteration to ``FINAL_STEP_RATIO`` times that at ``n_max``. It
    depends on the iteration count only, never on the temperature.
    """
    initial = step_size(bounds, config)
    if config.step_schedule == STEP_CONSTANT or config.n_max == 1:
        return np.tile(initial, (config.n_max, 1))
    fractions = np.arange(config.n_max) / (config.n_max - 1)
    return initial * np.power(FINAL_STEP_RATIO, fractions)[:, None]


def step_at(bounds: Bounds, config: SaaConfig, iteration: int) -> np.ndarray:
    """Row of ``step_schedule`` for ``iteration`` (1-based)."""
    if not 1 <= iteration <= config.n_max:
        raise InputValidationError(f"iteration must lie in [1, {config.n_max}], got {iteration}")
    return step_schedule(bounds, config)[iteration - 1]


def _propose(xy: np.ndarray, step: np.ndarray, lower: np.ndarray, upper: np.ndarray,
             rng: np.random.Generator) -> np.ndarray:
    u = rng.uniform(-1.0, 1.0, size=2)
    return np.clip(xy + u * step, lower, upper)


def propose_neighbor(x: Position, step, bounds: Bounds, rng: np.random.Generator) -> Position:
    """
    Uniform neighbour in the box ``x +/- step``, clamped to ``bounds``.

    Consumes exactly two uniform draws.
    """
    step = np.broadcast_to(np.asarray(step, dtype=float), (2,))
    if np.any(step <= 0):
        raise InputValidationError(f"step must be positive on both axes, got {step.tolist()}")
    xy = _propose(x.as_array(), step, bounds.lower, bounds.upper, rng)
    return Position(float(xy[0]), float(xy[1]))


def anneal(
    x0: Position,
    scenario: Scenario,
    meas: MeasurementSet,
    config: SaaConfig,
    rng: np.random.Generator,
    trace: Optional[List[TracePoint]] = None,
) -> Tuple[Position, float]:
    """
    Run one annealing branch from ``x0``.

    Each of the ``n_max`` iterations proposes a neighbour within the current
    step (see ``step_at``), accepts it by the Metropolis rule (a uniform coin
    is drawn only for uphill moves), updates the best point, then cools
    ``T <- epsilon * T``.

    Args:
        x0: Start point, inside the scenario bounds
        scenario: Anchors, path-loss parameters, and bounds
        meas: One reading per anchor
        config: Solver knobs
        rng: Random stream owned by this branch
        trace: If given, receives the start point and one TracePoint per iteration

    Returns:
        The best point visited and its cost
    """
    check_measurements(scenario, meas)
    if not scenario.bounds.contains(x0):
        raise InputValidationError(f"start point {x0.to_list()} lies outside the bounds")

    anchors = scenario.anchor_array
    readings = meas.as_array()
    params = scenario.params
    lower, upper = scenario.bounds.lower, scenario.bounds.upper

    start = x0.as_array()
    start_cost = cost_at(start, anchors, readings, params)
    steps = step_schedule(scenario.bounds, config)
    state = AnnealState.start(start, start_cost, config.t0_policy.initial_temperature(start_cost), steps[0])
    if trace is not None:
        trace.append(TracePoint(0, float(start[0]), float(start[1]), start_cost, state.temperature))

    for iteration in range(1, config.n_max + 1):
        state.step = steps[iteration - 1]
        candidate = _propose(state.current, state.step, lower, upper, rng)
        candidate_cost = cost_at(candidate, anchors, readings, params)
        delta = candidate_cost - state.current_cost

        if delta <= 0 or rng.random() < acceptance_probability(delta, state.temperature, config.k):
            state.current, state.current_cost = candidate, candidate_cost
            if candidate_cost < state.best_cost:
                state.best, state.best_cost = candidate, candidate_cost

        state.iteration = iteration
        if trace is not None:
            trace.append(TracePoint(
                iteration, float(state.current[0]), float(state.current[1]), state.current_cost, state.temperature
            ))
        # Floor keeps T > 0 when small epsilon and long runs would underflow it.
        state.temperature = max(state.temperature * config.epsilon, sys.float_info.min)

    logger.debug("anneal from %s: cost %.6g -> %.6g after %d iterations",
                 x0.to_list(), start_cost, state.best_cost, state.iteration)
    return state.position(), state.best_cost
