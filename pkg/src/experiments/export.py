"""
Writing sweep results as CSV or JSON, and reading the JSON form back.
"""
from enum import Enum
from typing import List, Sequence

import json
import logging

import pandas as pd

from src.experiments.harness import SweepResult, TrialRecord
from src.utils.errors import EmptyAggregateError, InputValidationError, ResultIOError
from src.utils.helpers import ensure_parent_directory, load_json_file

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["setting_name", "setting_value", "method", "rmse_m", "mean_crlb_m", "mean_runtime_s", "trials"]


class ExportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


def results_frame(results: Sequence[SweepResult]) -> pd.DataFrame:
    """One row per (setting, method)."""
    rows = []
    for result in results:
        for method, value in result.rmse.items():
            rows.append({
                "setting_name": result.setting_name,
                "setting_value": result.setting_value,
                "method": method,
                "rmse_m": value,
                "mean_crlb_m": result.mean_crlb,
                "mean_runtime_s": result.mean_runtime[method],
                "trials": result.trials,
            })
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def export_results(results: Sequence[SweepResult], format: ExportFormat, destination: str) -> None:
    """
    Write sweep results to ``destination``.

    Raises:
        EmptyAggregateError: no results
        ResultIOError: the destination cannot be written
    """
    if not results:
        raise EmptyAggregateError("no sweep results to export")
    format = ExportFormat(format)
    ensure_parent_directory(destination)
    try:
        if format == ExportFormat.CSV:
            results_frame(results).to_csv(destination, index=False)
        else:
            with open(destination, 'w', encoding='utf-8') as file:
                json.dump([r.to_dict() for r in results], file, indent=2)
    except OSError as e:
        raise ResultIOError(destination, e.strerror or str(e)) from e
    logger.info("wrote %d sweep points to %s", len(results), destination)


def load_results_json(source: str) -> List[SweepResult]:
    """Read results written by ``export_results(..., ExportFormat.JSON, ...)``."""
    data = load_json_file(source)
    if not isinstance(data, list):
        raise InputValidationError(f"{source}: expected a JSON array of sweep results")
    try:
        return [SweepResult.from_dict(item) for item in data]
    except TypeError as e:
        raise InputValidationError(f"{source}: malformed sweep result ({e})") from e


def export_trials(records: Sequence[TrialRecord], destination: str) -> None:
    """Trial-level dump, one CSV row per TrialRecord."""
    if not records:
        raise EmptyAggregateError("no trial records to export")
    ensure_parent_directory(destination)
    try:
        pd.DataFrame([r.to_row() for r in records]).to_csv(destination, index=False)
    except OSError as e:
        raise ResultIOError(destination, e.strerror or str(e)) from e
