"""
Exception hierarchy for the localization toolkit.

The CLI maps these classes to process exit codes, so library code raises
the most specific class it can and never exits on its own.
"""
from typing import Optional


class LocalizationError(Exception):
    """Base class for every error raised by the toolkit."""


class InputValidationError(LocalizationError, ValueError):
    """Malformed input: bad parameters, shapes, or file contents."""


class EmptyAggregateError(InputValidationError):
    """An aggregate (RMSE, export) was requested over no data."""


class GeometryError(LocalizationError):
    """Numerical failure caused by the anchor/target geometry."""


class SingularGeometryError(GeometryError):
    """A point coincides with an anchor, so log-distance is undefined."""


class DegenerateGeometryError(GeometryError):
    """Anchor layout leaves a linear system or information matrix rank-deficient."""


class UndefinedBoundError(GeometryError):
    """The Cramér-Rao bound does not exist for the given inputs (e.g. sigma = 0)."""


class PlacementError(GeometryError):
    """Random geometry generation exhausted its rejection-sampling budget."""


class ResultIOError(LocalizationError, OSError):
    """Reading or writing a file failed."""

    def __init__(self, path: str, message: str):
        self.path = str(path)
        self.message = message
        super().__init__(f"{self.path}: {message}")

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"

    def __reduce__(self):
        return (type(self), (self.path, self.message))


class SweepError(LocalizationError):
    """A Monte-Carlo trial failed; carries the setting and trial that broke."""

    def __init__(self, setting: float, trial_index: int, cause: Optional[BaseException] = None):
        self.setting = setting
        self.trial_index = trial_index
        self.cause = cause
        super().__init__(f"trial {trial_index} at setting {setting} failed: {cause}")

    def __reduce__(self):
        # joblib workers pickle exceptions back to the parent process
        return (type(self), (self.setting, self.trial_index, self.cause))
