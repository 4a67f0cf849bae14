"""
Control parameters of the annealing solver.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

import math

from src.utils.errors import InputValidationError

COST_SCALED = "cost_scaled"
FIXED = "fixed"

INIT_RANDOM = "random"
INIT_LLS = "lls"

STEP_SHRINKING = "shrinking"
STEP_CONSTANT = "constant"


@dataclass(frozen=True)
class TemperaturePolicy:
    """
    Rule for the initial temperature of each branch.

    ``cost_scaled`` starts at max(f(x0), 1); ``fixed`` starts at ``value``.
    """

    type: str = COST_SCALED
    value: Optional[float] = None

    def __post_init__(self):
        if self.type not in (COST_SCALED, FIXED):
            raise InputValidationError(f"unknown t0_policy type {self.type!r}")
        if self.type == FIXED:
            if self.value is None or not math.isfinite(self.value) or self.value <= 0:
                raise InputValidationError("fixed t0_policy needs a positive finite value")

    def initial_temperature(self, initial_cost: float) -> float:
        if self.type == FIXED:
            return float(self.value)
        return max(float(initial_cost), 1.0)

    def to_dict(self) -> Dict[str, Any]:
        if self.type == FIXED:
            return {"type": FIXED, "value": self.value}
        return {"type": COST_SCALED}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TemperaturePolicy":
        if not isinstance(data, dict) or "type" not in data:
            raise InputValidationError("t0_policy must be an object with a 'type' key")
        value = data.get("value")
        return cls(str(data["type"]), None if value is None else float(value))


@dataclass(frozen=True)
class SaaConfig:
    """
    Solver knobs.

    Attributes:
        epsilon: Temperature ratio applied at each cooling, in (0, 1)
        lambda_: Step ratio; proposal half-width is lambda_ * (x_max - x_min)
        n_max: Iterations per branch
        k: Boltzmann constant of the Metropolis rule
        t0_policy: Initial-temperature rule
        seed: Seed used when no random stream is supplied
        init: Original start, ``random`` or ``lls``
        step_schedule: ``shrinking`` narrows the proposal box geometrically over
            the run; ``constant`` keeps it at lambda_ * (x_max - x_min)
    """

    epsilon: float = 0.9
    lambda_: float = 0.4
    n_max: int = 500
    k: float = 1.0
    t0_policy: TemperaturePolicy = field(default_factory=TemperaturePolicy)
    seed: int = 42
    init: str = INIT_RANDOM
    step_schedule: str = STEP_SHRINKING

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise InputValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.lambda_ <= 1.0:
            raise InputValidationError(f"lambda must lie in (0, 1], got {self.lambda_}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InputValidationError(f"n_max must be a positive integer, got {self.n_max}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise InputValidationError(f"k must be positive, got {self.k}")
        if self.init not in (INIT_RANDOM, INIT_LLS):
            raise InputValidationError(f"init must be 'random' or 'lls', got {self.init!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InputValidationError(f"seed must be a non-negative integer, got {self.seed}")
        if self.step_schedule not in (STEP_SHRINKING, STEP_CONSTANT):
            raise InputValidationError(
                f"step_schedule must be 'shrinking' or 'constant', got {self.step_schedule!r}"
            )
        object.__setattr__(self, "n_max", int(self.n_max))
        object.__setattr__(self, "seed", int(self.seed))

    def with_overrides(self, **changes) -> "SaaConfig":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "lambda": self.lambda_,
            "n_max": self.n_max,
            "k": self.k,
            "t0_policy": self.t0_policy.to_dict(),
            "seed": self.seed,
            "init": self.init,
            "step_schedule": self.step_schedule,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], defaults: Optional["SaaConfig"] = None) -> "SaaConfig":
        """
        Parse the JSON/YAML form; absent keys keep the values of ``defaults``.
        """
        if not isinstance(data, dict):
            raise InputValidationError("solver config must be an object")
        unknown = set(data) - {"epsilon", "lambda", "n_max", "k", "t0_policy", "seed", "init", "step_schedule"}
        if unknown:
            raise InputValidationError(f"unknown solver config keys: {sorted(unknown)}")
        base = defaults or cls()
        try:
            return cls(
                epsilon=float(data.get("epsilon", base.epsilon)),
                lambda_=float(data.get("lambda", base.lambda_)),
                n_max=data.get("n_max", base.n_max),
                k=float(data.get("k", base.k)),
                t0_policy=(
                    TemperaturePolicy.from_dict(data["t0_policy"]) if "t0_policy" in data else base.t0_policy
                ),
                seed=int(data.get("seed", base.seed)),
                init=str(data.get("init", base.init)),
                step_schedule=str(data.get("step_schedule", base.step_schedule)),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, InputValidationError):
                raise
            raise InputValidationError(f"invalid solver config: {e}") from e
