"""Power delivery network simulator.

Configs travel as JSON text; ``load``/``dump`` convert to and from dicts.
"""

import json

from ._core import (
    AnalysisError,
    ConfigError,
    NetlistError,
    SolverError,
    compare,
    config_hash,
    dc,
    default_config,
    netlist,
    presets,
    sweep,
    transient,
    validate,
)

__all__ = [
    "AnalysisError",
    "ConfigError",
    "NetlistError",
    "SolverError",
    "compare",
    "config_hash",
    "dc",
    "default_config",
    "dump",
    "load",
    "netlist",
    "presets",
    "sweep",
    "transient",
    "validate",
]


def load(preset="default"):
    """Built-in scenario as a dict."""
    return json.loads(default_config(preset))


def dump(config):
    """Dict (or JSON text) to the JSON text the solver functions take."""
    return config if isinstance(config, str) else json.dumps(config)
