"""
Log-distance path-loss model.

Received power at distance d from an anchor is

    P = P0 - 10 * gamma * log10(d / d0) + n,   n ~ N(0, sigma^2)

with powers in dB and distances in meters.
"""
from dataclasses import dataclass, asdict
from typing import Any, Dict

import math

import numpy as np

from src.model.geometry import Position
from src.utils.errors import InputValidationError, SingularGeometryError


@dataclass(frozen=True)
class PathLossParams:
    """
    Path-loss parameters shared by every anchor.

    Attributes:
        p0: Reference received power at d0 (dB)
        gamma: Path loss exponent
        d0: Reference distance (m)
        sigma: Standard deviation of the dB measurement noise
    """

    p0: float = 10.0
    gamma: float = 3.0
    d0: float = 1.0
    sigma: float = 2.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.p0, self.gamma, self.d0, self.sigma)):
            raise InputValidationError("path-loss parameters must be finite")
        if self.gamma <= 0:
            raise InputValidationError(f"gamma must be positive, got {self.gamma}")
        if self.d0 <= 0:
            raise InputValidationError(f"d0 must be positive, got {self.d0}")
        if self.sigma < 0:
            raise InputValidationError(f"sigma must be non-negative, got {self.sigma}")

    def with_sigma(self, sigma: float) -> "PathLossParams":
        return PathLossParams(self.p0, self.gamma, self.d0, float(sigma))

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PathLossParams":
        if not isinstance(data, dict):
            raise InputValidationError("path-loss parameters must be an object")
        unknown = set(data) - {"p0", "gamma", "d0", "sigma"}
        if unknown:
            raise InputValidationError(f"unknown path-loss keys: {sorted(unknown)}")
        try:
            return cls(**{key: float(value) for key, value in data.items()})
        except (TypeError, ValueError) as e:
            raise InputValidationError(f"invalid path-loss parameters: {e}") from e


def rss_at_distance(params: PathLossParams, distance):
    """Noise-free received power for one distance or an array of them."""
    return params.p0 - 10.0 * params.gamma * np.log10(np.asarray(distance) / params.d0)


def expected_rss(params: PathLossParams, anchor: Position, target: Position) -> float:
    """
    Noise-free RSS a target receives from an anchor.

    Raises:
        SingularGeometryError: target and anchor coincide
    """
    distance = np.hypot(target.x1 - anchor.x1, target.x2 - anchor.x2)
    if distance == 0.0:
        raise SingularGeometryError(f"target {target.to_list()} coincides with anchor {anchor.to_list()}")
    return float(rss_at_distance(params, distance))


def range_estimate(p_i: float, params: PathLossParams) -> float:
    """Invert the noise-free model: distance implied by a reading ``p_i`` (dB)."""
    return params.d0 * 10.0 ** ((params.p0 - p_i) / (10.0 * params.gamma))
