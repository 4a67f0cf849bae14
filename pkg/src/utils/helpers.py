"""
Helper utilities shared by the library and the CLI.
"""
from typing import Dict, Any
import copy
import json
import logging
import os
import sys

import yaml
from colorama import Fore, Style, init as colorama_init

from src.utils.errors import InputValidationError, ResultIOError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
    "config",
    "config.yml",
)

# Mirrors config/config.yml; used when that file cannot be read.
DEFAULT_CONFIG: Dict[str, Any] = {
    "path_loss": {"p0": 10.0, "gamma": 3.0, "d0": 1.0, "sigma": 2.0},
    "area": {"min": [0.0, 0.0], "max": [40.0, 40.0]},
    "solver": {
        "epsilon": 0.9,
        "lambda": 0.4,
        "n_max": 500,
        "k": 1.0,
        "t0_policy": {"type": "cost_scaled"},
        "init": "random",
        "step_schedule": "shrinking",
        "seed": 42,
    },
    "grid": {"resolution": 0.4, "refine_levels": 2},
    "experiment": {
        "n_anchors": 10,
        "trials": 2000,
        "master_seed": 42,
        "n_jobs": 1,
        "min_separation": 0.1,
        "max_placement_attempts": 1000,
    },
}


def load_yaml_file(file_path: str) -> Dict[str, Any]:
    """
    Load and parse a YAML file.

    Args:
        file_path: Path to the YAML file

    Returns:
        Dictionary containing the YAML content, or an empty dict when the
        file is missing or unreadable
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return yaml.safe_load(file) or {}
    except (OSError, yaml.YAMLError) as e:
        logger.warning("Error loading YAML file %s: %s", file_path, e)
        return {}


def load_config(config_path: str = DEFAULT_CONFIG_PATH) -> Dict[str, Any]:
    """
    Load project defaults, filling anything the file omits from DEFAULT_CONFIG.

    Args:
        config_path: Path to the configuration file

    Returns:
        Dictionary with every section of DEFAULT_CONFIG present
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    for section, values in load_yaml_file(config_path).items():
        if isinstance(values, dict) and isinstance(config.get(section), dict):
            config[section].update(values)
        else:
            config[section] = values
    return config


def load_json_file(file_path: str) -> Any:
    """
    Load a JSON document.

    Raises:
        ResultIOError: the file cannot be opened
        InputValidationError: the content is not valid JSON or not UTF-8
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return json.load(file)
    except json.JSONDecodeError as e:
        raise InputValidationError(f"{file_path}: invalid JSON ({e})") from e
    except UnicodeDecodeError as e:
        raise InputValidationError(f"{file_path}: not UTF-8 text ({e.reason} at byte {e.start})") from e
    except OSError as e:
        raise ResultIOError(file_path, e.strerror or str(e)) from e


def ensure_directory_exists(directory_path: str) -> None:
    """
    Ensure a directory exists, creating it if necessary.

    Args:
        directory_path: Path to the directory
    """
    if directory_path and not os.path.exists(directory_path):
        try:
            os.makedirs(directory_path)
        except OSError as e:
            raise ResultIOError(directory_path, e.strerror or str(e)) from e


def ensure_parent_directory(file_path: str) -> None:
    """Create the directory a file will be written into."""
    ensure_directory_exists(os.path.dirname(os.path.abspath(file_path)))


class ColorFormatter(logging.Formatter):
    """Prefixes each record with a coloured level tag."""

    COLORS = {
        logging.DEBUG: Fore.CYAN,
        logging.INFO: Fore.GREEN,
        logging.WARNING: Fore.YELLOW,
        logging.ERROR: Fore.RED,
        logging.CRITICAL: Fore.MAGENTA + Style.BRIGHT,
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelno, "")
        message = super().format(record)
        return f"{color}[{record.levelname.lower()}]{Style.RESET_ALL} {message}"


def setup_logging(verbosity: int = 0) -> None:
    """
    Route library logs to stderr.

    Args:
        verbosity: -1 for warnings only, 0 for info, 1 or more for debug
    """
    colorama_init()
    level = logging.INFO
    if verbosity < 0:
        level = logging.WARNING
    elif verbosity > 0:
        level = logging.DEBUG

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColorFormatter("%(name)s: %(message)s"))

    root = logging.getLogger("src")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False
