"""Optimal control of linear parabolic PDEs.

Thin layer over the compiled ``_pocp`` module: configuration and report
helpers return plain Python objects decoded from JSON.
"""

import json

from ._pocp import (
    ControlSolution,
    DataFunction,
    DiscreteProblem,
    Error,
    KrylovReport,
    SpatialMesh,
    discretize,
    gamma_bound,
    interval_mesh,
    max_eig_reduced,
    reduced_spectrum,
    saddle_spectrum,
    solve_all_at_once,
    solve_reduced,
    unit_square_mesh,
)
from . import _pocp

__all__ = [
    "ControlSolution",
    "DataFunction",
    "DiscreteProblem",
    "Error",
    "KrylovReport",
    "SpatialMesh",
    "discretize",
    "gamma_bound",
    "interval_mesh",
    "max_eig_reduced",
    "parse_config",
    "presets",
    "reduced_spectrum",
    "run_experiment",
    "saddle_spectrum",
    "solve_all_at_once",
    "solve_reduced",
    "unit_square_mesh",
    "verify",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def parse_config(config):
    """Validate a config (dict or JSON text); returns it with defaults applied."""
    return json.loads(_pocp._parse_config(_text(config)))


def run_experiment(config):
    """Run every sweep point; returns the list of run records."""
    return json.loads(_pocp._run_experiment(_text(config)))


def verify(config, include_saddle=True):
    """Eigenvalue claim checks for one configuration."""
    return json.loads(_pocp._verify(_text(config), include_saddle))


def presets():
    """Built-in experiment presets keyed by name."""
    return json.loads(_pocp._presets())
