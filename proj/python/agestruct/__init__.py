"""Moment-closure dynamics for age-structured populations."""

import json
import os

from ._core import (
    AssumptionError,
    ConfigError,
    NoSolutionError,
    PreconditionError,
    Scenario,
)

__all__ = [
    "AssumptionError",
    "ConfigError",
    "NoSolutionError",
    "PreconditionError",
    "Scenario",
    "load",
]


def load(config):
    """Scenario from a path, a JSON string or a dict."""
    if isinstance(config, dict):
        return Scenario(json.dumps(config))
    if isinstance(config, os.PathLike) or (isinstance(config, str) and os.path.exists(config)):
        return Scenario.from_file(os.fspath(config))
    return Scenario(config)
