"""
Brute-force lattice minimizer of the ML cost, and cost-surface dumps.

Lattices are scanned row-major with x1 as the outer index and x2 as the
inner one; ties resolve to the first point in that order.
"""
from dataclasses import dataclass
from typing import Tuple

import logging
import math

import numpy as np
import pandas as pd

from src.model.geometry import Bounds, Position
from src.model.scenario import MeasurementSet, Scenario, check_measurements, cost_at_points
from src.utils.errors import InputValidationError, ResultIOError
from src.utils.helpers import ensure_parent_directory

logger = logging.getLogger(__name__)

REFINE_FACTOR = 10
_ENDPOINT_TOL = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """
    Attributes:
        resolution: Pitch of the coarse lattice (m)
        refine_levels: Rounds of 3x3-cell refinement at one tenth the previous pitch
    """

    resolution: float = 0.4
    refine_levels: int = 2

    def __post_init__(self):
        if not (math.isfinite(self.resolution) and self.resolution > 0):
            raise InputValidationError(f"grid resolution must be positive, got {self.resolution}")
        if int(self.refine_levels) != self.refine_levels or self.refine_levels < 0:
            raise InputValidationError(f"refine_levels must be a non-negative integer, got {self.refine_levels}")


def lattice_axis(lo: float, hi: float, pitch: float) -> np.ndarray:
    """Points lo, lo + pitch, ... up to hi; hi itself is always included."""
    count = int(math.floor((hi - lo) / pitch + _ENDPOINT_TOL))
    axis = lo + pitch * np.arange(count + 1)
    if hi - axis[-1] > _ENDPOINT_TOL * max(1.0, abs(hi)):
        axis = np.append(axis, hi)
    else:
        axis[-1] = min(axis[-1], hi)
    return axis


def lattice(bounds: Bounds, pitch: float) -> np.ndarray:
    """All lattice points of ``bounds`` as an (M, 2) array in scan order."""
    axis1 = lattice_axis(bounds.min.x1, bounds.max.x1, pitch)
    axis2 = lattice_axis(bounds.min.x2, bounds.max.x2, pitch)
    grid1, grid2 = np.meshgrid(axis1, axis2, indexing="ij")
    return np.column_stack([grid1.ravel(), grid2.ravel()])


def _scan(points: np.ndarray, scenario: Scenario, meas: MeasurementSet) -> Tuple[np.ndarray, float]:
    costs = cost_at_points(points, scenario, meas)
    index = int(np.argmin(costs))
    return points[index], float(costs[index])


def grid_oracle(scenario: Scenario, meas: MeasurementSet, grid: GridSpec = GridSpec()) -> Tuple[Position, float]:
    """
    Exhaustive lattice search over the bounds followed by local refinement.

    Each refinement round re-grids the cells around the incumbent, one
    coarse pitch either side, at a tenth of the pitch; the incumbent is
    replaced only by a strictly lower cost.

    Returns:
        Best lattice point and its ML cost
    """
    check_measurements(scenario, meas)
    bounds = scenario.bounds
    pitch = grid.resolution
    best, best_cost = _scan(lattice(bounds, pitch), scenario, meas)

    for _ in range(int(grid.refine_levels)):
        lower = np.maximum(best - pitch, bounds.lower)
        upper = np.minimum(best + pitch, bounds.upper)
        pitch /= REFINE_FACTOR
        if np.any(upper <= lower):
            break
        region = Bounds(Position(float(lower[0]), float(lower[1])), Position(float(upper[0]), float(upper[1])))
        candidate, candidate_cost = _scan(lattice(region, pitch), scenario, meas)
        if candidate_cost < best_cost:
            best, best_cost = candidate, candidate_cost

    return Position(float(best[0]), float(best[1])), best_cost


def cost_surface(scenario: Scenario, meas: MeasurementSet, pitch: float) -> pd.DataFrame:
    """ML cost on the lattice of ``pitch`` over the bounds, one row per point."""
    if not (math.isfinite(pitch) and pitch > 0):
        raise InputValidationError(f"pitch must be positive, got {pitch}")
    check_measurements(scenario, meas)
    points = lattice(scenario.bounds, pitch)
    return pd.DataFrame({
        "x1": points[:, 0],
        "x2": points[:, 1],
        "cost": cost_at_points(points, scenario, meas),
    })


def write_surface_csv(surface: pd.DataFrame, path: str) -> None:
    ensure_parent_directory(path)
    try:
        surface.to_csv(path, index=False)
    except OSError as e:
        raise ResultIOError(path, e.strerror or str(e)) from e
    logger.info("wrote %d surface points to %s", len(surface), path)
