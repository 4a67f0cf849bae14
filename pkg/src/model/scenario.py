"""
Localization instances: anchor layout, RSS readings, and the ML cost.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import itertools
import math

import numpy as np

from src.model.geometry import Bounds, Position
from src.model.path_loss import PathLossParams, rss_at_distance
from src.utils.errors import InputValidationError, SingularGeometryError
from src.utils.helpers import load_json_file

# Distances below this are clamped inside the cost so the search never hits log(0).
MIN_COST_DISTANCE = 1e-6


@dataclass(frozen=True)
class Scenario:
    """
    Ground truth of one localization instance.

    Attributes:
        anchors: Known anchor positions
        params: Path-loss parameters
        bounds: Search region; every anchor lies inside it
    """

    anchors: Tuple[Position, ...]
    params: PathLossParams
    bounds: Bounds
    _anchor_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        anchors = tuple(self.anchors)
        object.__setattr__(self, "anchors", anchors)
        if not anchors:
            raise InputValidationError("a scenario needs at least one anchor")
        for anchor in anchors:
            if not self.bounds.contains(anchor):
                raise InputValidationError(f"anchor {anchor.to_list()} lies outside the bounds")
        for a, b in itertools.combinations(anchors, 2):
            if a == b:
                raise InputValidationError(f"duplicate anchor position {a.to_list()}")
        array = np.array([a.to_list() for a in anchors], dtype=float)
        array.setflags(write=False)
        object.__setattr__(self, "_anchor_array", array)

    @property
    def n_anchors(self) -> int:
        return len(self.anchors)

    @property
    def anchor_array(self) -> np.ndarray:
        """Anchors as a read-only (N, 2) array."""
        return self._anchor_array

    def to_dict(self) -> Dict[str, Any]:
        return {
            "anchors": [a.to_list() for a in self.anchors],
            "params": self.params.to_dict(),
            "bounds": self.bounds.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        if not isinstance(data, dict):
            raise InputValidationError("scenario JSON must be an object")
        missing = {"anchors", "params", "bounds"} - set(data)
        if missing:
            raise InputValidationError(f"scenario is missing keys: {sorted(missing)}")
        try:
            anchors = tuple(Position.from_sequence(a) for a in data["anchors"])
        except (TypeError, ValueError) as e:
            raise InputValidationError(f"invalid anchor list: {e}") from e
        return cls(anchors, PathLossParams.from_dict(data["params"]), Bounds.from_dict(data["bounds"]))


@dataclass(frozen=True)
class MeasurementSet:
    """
    RSS readings in dB; ``p[i]`` was measured from anchor ``i``.
    """

    p: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.p)
        if not all(math.isfinite(v) for v in values):
            raise InputValidationError("measurements must be finite")
        object.__setattr__(self, "p", values)

    def __len__(self) -> int:
        return len(self.p)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    def to_list(self) -> List[float]:
        return list(self.p)

    @classmethod
    def from_list(cls, values: Sequence[float]) -> "MeasurementSet":
        if not isinstance(values, (list, tuple)):
            raise InputValidationError("measurements JSON must be an array of numbers")
        try:
            return cls(tuple(float(v) for v in values))
        except (TypeError, ValueError) as e:
            raise InputValidationError(f"invalid measurement value: {e}") from e


def check_measurements(scenario: Scenario, meas: MeasurementSet) -> None:
    """Raise InputValidationError unless there is one reading per anchor."""
    if len(meas) != scenario.n_anchors:
        raise InputValidationError(
            f"got {len(meas)} measurements for {scenario.n_anchors} anchors"
        )


def generate_measurements(scenario: Scenario, target: Position, rng: np.random.Generator) -> MeasurementSet:
    """
    Simulate one RSS reading per anchor.

    Draws exactly N Gaussian variates, in anchor order.

    Raises:
        SingularGeometryError: the target sits on an anchor
    """
    # Same arithmetic as cost_at, so zero-noise readings give an exactly zero cost at the target.
    deltas = target.as_array() - scenario.anchor_array
    distances = np.hypot(deltas[:, 0], deltas[:, 1])
    if np.any(distances == 0.0):
        anchor = scenario.anchors[int(np.argmin(distances))]
        raise SingularGeometryError(f"target {target.to_list()} coincides with anchor {anchor.to_list()}")
    expected = rss_at_distance(scenario.params, distances)
    noise = rng.normal(0.0, scenario.params.sigma, size=scenario.n_anchors)
    return MeasurementSet(tuple(expected + noise))


def cost_at_points(points: np.ndarray, scenario: Scenario, meas: MeasurementSet) -> np.ndarray:
    """
    ML cost evaluated at an (M, 2) array of points.

    Distances are clamped to MIN_COST_DISTANCE, so every point is valid.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    deltas = points[:, None, :] - scenario.anchor_array[None, :, :]
    distances = np.maximum(np.hypot(deltas[..., 0], deltas[..., 1]), MIN_COST_DISTANCE)
    residuals = meas.as_array()[None, :] - rss_at_distance(scenario.params, distances)
    return np.sum(residuals * residuals, axis=1)


def cost_at(xy: np.ndarray, anchors: np.ndarray, readings: np.ndarray, params: PathLossParams) -> float:
    """Single-point ML cost on raw arrays; the annealer's inner loop calls this."""
    deltas = xy - anchors
    distances = np.maximum(np.hypot(deltas[:, 0], deltas[:, 1]), MIN_COST_DISTANCE)
    residuals = readings - rss_at_distance(params, distances)
    return float(residuals @ residuals)


def ml_cost(x: Position, scenario: Scenario, meas: MeasurementSet) -> float:
    """
    Unweighted ML cost f(x) = sum_i (P_i - P0 + 10 gamma log10(||x - a_i|| / d0))^2.

    The common 1/sigma^2 factor is dropped; the argmin is unchanged.
    """
    check_measurements(scenario, meas)
    return cost_at(x.as_array(), scenario.anchor_array, meas.as_array(), scenario.params)


def load_scenario(file_path: str) -> Scenario:
    return Scenario.from_dict(load_json_file(file_path))


def load_measurements(file_path: str) -> MeasurementSet:
    return MeasurementSet.from_list(load_json_file(file_path))
