"""
Planar geometry primitives: positions and the rectangular search region.
"""
from dataclasses import dataclass
from typing import Any, Dict, Sequence

import math

import numpy as np

from src.utils.errors import InputValidationError


@dataclass(frozen=True)
class Position:
    """
    A 2-D point in meters.

    Attributes:
        x1: First coordinate
        x2: Second coordinate
    """

    x1: float
    x2: float

    def __post_init__(self):
        if not (math.isfinite(self.x1) and math.isfinite(self.x2)):
            raise InputValidationError(f"position coordinates must be finite, got ({self.x1}, {self.x2})")

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> "Position":
        """Build a position from an ``[x1, x2]`` pair."""
        if len(values) != 2:
            raise InputValidationError(f"expected an [x1, x2] pair, got {list(values)!r}")
        return cls(float(values[0]), float(values[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2], dtype=float)

    def to_list(self):
        return [self.x1, self.x2]

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x1 - other.x1, self.x2 - other.x2)


@dataclass(frozen=True)
class Bounds:
    """
    Axis-aligned box bounding the solution space.

    Attributes:
        min: Lower corner (x_min)
        max: Upper corner (x_max)
    """

    min: Position
    max: Position

    def __post_init__(self):
        if not (self.min.x1 < self.max.x1 and self.min.x2 < self.max.x2):
            raise InputValidationError(
                f"bounds require min < max component-wise, got {self.min.to_list()} / {self.max.to_list()}"
            )

    @classmethod
    def square(cls, side: float, origin: float = 0.0) -> "Bounds":
        return cls(Position(origin, origin), Position(origin + side, origin + side))

    @property
    def lower(self) -> np.ndarray:
        return self.min.as_array()

    @property
    def upper(self) -> np.ndarray:
        return self.max.as_array()

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, point: Position, tol: float = 0.0) -> bool:
        return (
            self.min.x1 - tol <= point.x1 <= self.max.x1 + tol
            and self.min.x2 - tol <= point.x2 <= self.max.x2 + tol
        )

    def clip(self, xy: np.ndarray) -> np.ndarray:
        return np.clip(xy, self.lower, self.upper)

    def to_dict(self) -> Dict[str, Any]:
        return {"min": self.min.to_list(), "max": self.max.to_list()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Bounds":
        try:
            return cls(Position.from_sequence(data["min"]), Position.from_sequence(data["max"]))
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, InputValidationError):
                raise
            raise InputValidationError(f"bounds need 'min' and 'max' pairs: {e}") from e
