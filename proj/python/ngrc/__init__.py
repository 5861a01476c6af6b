"""Next-generation reservoir computing: NVAR features, ridge readouts, benchmarks."""

import json

from ._ngrc import *  # noqa: F401,F403
from ._ngrc import resolve_config, run_experiment_text

__version__ = "0.1.0"


def run_experiment(config):
    """Run an experiment from a config document (str) or a dict of keys.

    Returns (summary dict, {file name: content}). Nothing is written to disk.
    """
    if isinstance(config, dict):
        config = "\n".join(f"{k} = {_format_value(v)}" for k, v in config.items())
    summary, artifacts = run_experiment_text(config)
    return json.loads(summary), dict(artifacts)


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    return str(value)
