"""Anderson model on random regular graphs.

Thin wrappers over the compiled core. Configs can be passed as dicts, JSON
strings or paths to JSON files.
"""

import json
import os

from ._core import *  # noqa: F401,F403
from ._core import InvalidInput, run_experiment as _run_experiment, resolve_config as _resolve_config


def _config_text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, os.PathLike) or (isinstance(config, str) and os.path.isfile(config)):
        with open(config, encoding="utf-8") as f:
            return f.read()
    return config


def resolve_config(config):
    """Return the validated config with all defaults as a dict."""
    return json.loads(_resolve_config(_config_text(config)))


def run_experiment(config, out_dir, stages=(), strict_invariants=False):
    """Run the selected pipeline stages and return the written paths relative to out_dir."""
    return _run_experiment(_config_text(config), os.fspath(out_dir), list(stages), strict_invariants)


__all__ = [name for name in dir() if not name.startswith("_")]
