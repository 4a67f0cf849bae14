"""
Linear least-squares trilateration from RSS-derived ranges.
"""
import numpy as np

from src.model.geometry import Position
from src.model.path_loss import range_estimate
from src.model.scenario import MeasurementSet, Scenario, check_measurements
from src.utils.errors import DegenerateGeometryError


def range_estimates(scenario: Scenario, meas: MeasurementSet) -> np.ndarray:
    """Noise-free range inversion of every reading."""
    return np.array([range_estimate(p, scenario.params) for p in meas.p])


def lls_estimate(scenario: Scenario, meas: MeasurementSet) -> Position:
    """
    Squared-range linear least squares.

    Each anchor gives ||x - a_i||^2 = d_i^2. Subtracting the mean of these
    equations cancels ||x||^2 and leaves the linear system

        2 (a_i - a_mean)^T x = ||a_i||^2 - mean ||a||^2 - d_i^2 + mean d^2

    solved in least squares with equal weights. No clamping to the bounds.

    Raises:
        DegenerateGeometryError: fewer than three anchors, or all anchors collinear
    """
    check_measurements(scenario, meas)
    if scenario.n_anchors < 3:
        raise DegenerateGeometryError(f"LLS needs at least 3 anchors, got {scenario.n_anchors}")

    anchors = scenario.anchor_array
    squared_ranges = range_estimates(scenario, meas) ** 2
    squared_norms = np.sum(anchors * anchors, axis=1)

    A = 2.0 * (anchors - anchors.mean(axis=0))
    b = squared_norms - squared_norms.mean() - squared_ranges + squared_ranges.mean()

    if np.linalg.matrix_rank(A) < 2:
        raise DegenerateGeometryError("anchors are collinear; the LLS system is rank-deficient")
    solution = np.linalg.lstsq(A, b, rcond=None)[0]
    return Position(float(solution[0]), float(solution[1]))
