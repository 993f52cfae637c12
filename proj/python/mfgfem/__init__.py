"""P1 finite elements for stationary mean field games."""

import json

from ._mfgfem import (
    ConfigError,
    Error,
    check_gradient,
    config_hash,
    convexity_violation,
    hamiltonian_value,
    max_grad_norm,
    mesh,
    mesh_quality,
    mesh_quality_of,
    read_mesh,
    reference_matrices,
    solve,
    verify_dmp,
)
from ._mfgfem import convergence_json as _convergence_json


def _literals(overrides):
    out = {}
    for key, value in (overrides or {}).items():
        out[key] = value if isinstance(value, str) else json.dumps(value)
    return out


def run(overrides=None, allow_unstabilized=False):
    """Solve with config overrides given as Python values."""
    return solve(_literals(overrides), allow_unstabilized)


def convergence(overrides=None, allow_unstabilized=False):
    """EOC table as a dict with "reference" and "rows"."""
    return json.loads(_convergence_json(_literals(overrides), allow_unstabilized))


__all__ = [
    "ConfigError",
    "Error",
    "check_gradient",
    "config_hash",
    "convergence",
    "convexity_violation",
    "hamiltonian_value",
    "max_grad_norm",
    "mesh",
    "mesh_quality",
    "mesh_quality_of",
    "read_mesh",
    "reference_matrices",
    "run",
    "solve",
    "verify_dmp",
]
