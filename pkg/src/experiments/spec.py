"""
Description of a Monte-Carlo experiment: geometry, noise, solver, and comparators.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence, Tuple, Union

from src.baselines.grid_oracle import GridSpec
from src.model.geometry import Bounds
from src.model.path_loss import PathLossParams
from src.solver.config import SaaConfig
from src.utils.errors import InputValidationError

SETTING_SIGMA = "sigma"
SETTING_N = "n"


class Method(str, Enum):
    """Estimators a sweep can score. OBL_SAA always runs."""

    OBL_SAA = "obl_saa"
    SAA = "saa"
    LLS = "lls"
    GRID_ORACLE = "grid_oracle"
    CRLB = "crlb"

    @classmethod
    def parse(cls, name: str) -> "Method":
        key = name.strip().lower().replace("-", "_")
        aliases = {"grid": cls.GRID_ORACLE, "gridoracle": cls.GRID_ORACLE, "oracle": cls.GRID_ORACLE}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InputValidationError(f"unknown method {name!r}") from None


COMPARATORS = frozenset({Method.SAA, Method.LLS, Method.GRID_ORACLE, Method.CRLB})


def parse_comparators(names: Iterable[str]) -> FrozenSet[Method]:
    methods = frozenset(Method.parse(n) for n in names if n.strip())
    if Method.OBL_SAA in methods:
        methods = methods - {Method.OBL_SAA}
    return methods


def _as_values(value) -> Tuple[Union[int, float], ...]:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


@dataclass(frozen=True)
class ExperimentSpec:
    """
    Attributes:
        area: Region anchors and targets are drawn from, also the search bounds
        n_anchors: Anchor count, or a list of counts to sweep
        sigma: Noise std in dB, or a list of values to sweep
        params: Base path-loss parameters; sigma is replaced per setting
        trials: Monte-Carlo trials per setting
        master_seed: Root of every trial's random stream
        solver: Solver knobs for OBL_SAA and SAA
        comparators: Methods scored next to OBL_SAA
        grid: Lattice used by the grid oracle
        n_jobs: joblib worker count for trials
        min_separation: Smallest anchor-target distance accepted when placing nodes
        max_placement_attempts: Rejection-sampling budget per trial
    """

    area: Bounds = field(default_factory=lambda: Bounds.square(40.0))
    n_anchors: Union[int, Tuple[int, ...]] = 10
    sigma: Union[float, Tuple[float, ...]] = 2.0
    params: PathLossParams = field(default_factory=PathLossParams)
    trials: int = 2000
    master_seed: int = 42
    solver: SaaConfig = field(default_factory=SaaConfig)
    comparators: FrozenSet[Method] = frozenset()
    grid: GridSpec = field(default_factory=GridSpec)
    n_jobs: int = 1
    min_separation: float = 0.1
    max_placement_attempts: int = 1000

    def __post_init__(self):
        if isinstance(self.n_anchors, list):
            object.__setattr__(self, "n_anchors", tuple(self.n_anchors))
        if isinstance(self.sigma, list):
            object.__setattr__(self, "sigma", tuple(self.sigma))
        object.__setattr__(self, "comparators", frozenset(self.comparators))

        if isinstance(self.n_anchors, tuple) and isinstance(self.sigma, tuple):
            raise InputValidationError("only one of n_anchors and sigma may be swept at a time")
        if self.trials < 1:
            raise InputValidationError(f"trials must be at least 1, got {self.trials}")
        if self.n_jobs == 0:
            raise InputValidationError("n_jobs must be non-zero")
        if self.min_separation < 0 or self.max_placement_attempts < 1:
            raise InputValidationError("placement limits must be non-negative / positive")
        for n in _as_values(self.n_anchors):
            if int(n) != n or n < 1:
                raise InputValidationError(f"anchor counts must be positive integers, got {n}")
        for s in _as_values(self.sigma):
            if s < 0:
                raise InputValidationError(f"sigma must be non-negative, got {s}")
        if int(self.master_seed) != self.master_seed or self.master_seed < 0:
            raise InputValidationError(f"master_seed must be a non-negative integer, got {self.master_seed}")
        keys = [setting_key(value) for value in self.settings()]
        if len(set(keys)) != len(keys):
            raise InputValidationError(f"swept values {self.settings()} must round to distinct thousandths")
        unknown = self.comparators - COMPARATORS
        if unknown:
            raise InputValidationError(f"not a comparator: {sorted(m.value for m in unknown)}")

    @property
    def setting_name(self) -> str:
        return SETTING_N if isinstance(self.n_anchors, tuple) else SETTING_SIGMA

    def settings(self) -> List[Union[int, float]]:
        """Values of the swept quantity, in sweep order."""
        if self.setting_name == SETTING_N:
            return [int(n) for n in self.n_anchors]
        return [float(s) for s in _as_values(self.sigma)]

    def resolve(self, setting: Union[int, float]) -> Tuple[int, float]:
        """(anchor count, sigma) used at one setting."""
        if self.setting_name == SETTING_N:
            return int(setting), float(_as_values(self.sigma)[0])
        return int(_as_values(self.n_anchors)[0]), float(setting)

    def with_overrides(self, **changes) -> "ExperimentSpec":
        return replace(self, **changes)

    @classmethod
    def from_config(cls, config: Dict[str, Any], **overrides) -> "ExperimentSpec":
        """
        Build a spec from the project config dict (see config/config.yml).
        """
        experiment = config.get("experiment", {})
        path_loss = dict(config.get("path_loss", {}))
        sigma = path_loss.pop("sigma", 2.0)
        grid = config.get("grid", {})
        values: Dict[str, Any] = dict(
            area=Bounds.from_dict(config.get("area", {"min": [0, 0], "max": [40, 40]})),
            n_anchors=int(experiment.get("n_anchors", 10)),
            sigma=float(sigma),
            params=PathLossParams.from_dict(path_loss),
            trials=int(experiment.get("trials", 2000)),
            master_seed=int(experiment.get("master_seed", 42)),
            solver=SaaConfig.from_dict(config.get("solver", {})),
            grid=GridSpec(float(grid.get("resolution", 0.4)), int(grid.get("refine_levels", 2))),
            n_jobs=int(experiment.get("n_jobs", 1)),
            min_separation=float(experiment.get("min_separation", 0.1)),
            max_placement_attempts=int(experiment.get("max_placement_attempts", 1000)),
        )
        values.update(overrides)
        return cls(**values)


def setting_key(setting: Union[int, float]) -> int:
    """
    Integer stream key for a setting value: the value in thousandths, rounded.

    Values closer than 0.0005 may share a key; ExperimentSpec rejects such sweeps.
    """
    return int(round(float(setting) * 1000))


def sweep_values(text: str, integer: bool = False) -> Sequence[Union[int, float]]:
    """Parse a comma-separated, strictly increasing list of values."""
    try:
        values = [int(v) if integer else float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise InputValidationError(f"invalid value list {text!r}: {e}") from e
    if not values:
        raise InputValidationError("the value list is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InputValidationError(f"values must be strictly increasing, got {values}")
    return values
