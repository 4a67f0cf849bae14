"""
Cramér-Rao lower bound for RSS localization under log-normal shadowing.

With readings P_i = P0 - 10 gamma log10(||x - a_i|| / d0) + n_i and
n_i ~ N(0, sigma^2), the Fisher information about x is

    J = c^2 * sum_i (x - a_i)(x - a_i)^T / ||x - a_i||^4,   c = 10 gamma / (sigma ln 10)
"""
from dataclasses import dataclass

import math

import numpy as np

from src.model.geometry import Position
from src.model.scenario import Scenario
from src.utils.errors import DegenerateGeometryError, SingularGeometryError, UndefinedBoundError

# Condition number above which the information matrix is treated as singular.
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class FisherInfo:
    """Symmetric 2x2 Fisher information matrix, entries in 1/m^2."""

    m11: float
    m12: float
    m22: float

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.as_matrix())


def fisher_information(scenario: Scenario, target: Position) -> FisherInfo:
    """
    Fisher information about the target position.

    Raises:
        SingularGeometryError: the target coincides with an anchor
        UndefinedBoundError: sigma is zero
    """
    sigma = scenario.params.sigma
    if sigma == 0:
        raise UndefinedBoundError("the Fisher information is unbounded for noise-free readings (sigma = 0)")

    deltas = target.as_array() - scenario.anchor_array
    squared = np.sum(deltas * deltas, axis=1)
    if np.any(squared == 0.0):
        raise SingularGeometryError(f"target {target.to_list()} coincides with an anchor")

    c = 10.0 * scenario.params.gamma / (sigma * math.log(10.0))
    weights = c * c / (squared * squared)
    matrix = (deltas * weights[:, None]).T @ deltas
    return FisherInfo(float(matrix[0, 0]), float(0.5 * (matrix[0, 1] + matrix[1, 0])), float(matrix[1, 1]))


def crlb_rmse(scenario: Scenario, target: Position) -> float:
    """
    Bound on the RMSE of any unbiased estimator: sqrt(trace(J^-1)), in meters.

    Raises:
        DegenerateGeometryError: J is singular (e.g. one anchor, or target on the anchor line)
    """
    info = fisher_information(scenario, target)
    determinant = info.m11 * info.m22 - info.m12 * info.m12
    if determinant <= 0 or np.linalg.cond(info.as_matrix()) > MAX_CONDITION:
        raise DegenerateGeometryError("Fisher information is singular for this geometry")
    # trace of the 2x2 inverse is (m11 + m22) / det
    return math.sqrt((info.m11 + info.m22) / determinant)
