"""RBM variational Monte Carlo for the transverse-field Ising model."""

import json as _json

from ._annealnqs import (
    Error,
    Lattice,
    LatticeKind,
    RbmParams,
    chain,
    dense_ground_energy,
    diagonal_energy,
    embed_report,
    exact_energy_1d,
    exact_energy_1d_thermo,
    lanczos_ground_energy,
    local_energy,
    log_derivatives,
    log_psi,
    lower_to_text,
    psi_ratio,
    reference_energy,
    sample_annealer,
    sample_exact,
    sample_gibbs,
    sample_metropolis,
    torus,
)
from . import _annealnqs


def _as_text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def validate_config(config):
    """List of (code, field, message) problems; empty when the config runs."""
    return _annealnqs.validate_config(_as_text(config))


def train(config):
    """Run an experiment in memory and return its energies and final params."""
    return _annealnqs.train(_as_text(config))


def run(config):
    """Run an experiment writing artifacts to its output dir. Returns (exit_code, log)."""
    return _annealnqs.run(_as_text(config))


__all__ = [
    "Error",
    "Lattice",
    "LatticeKind",
    "RbmParams",
    "chain",
    "dense_ground_energy",
    "diagonal_energy",
    "embed_report",
    "exact_energy_1d",
    "exact_energy_1d_thermo",
    "lanczos_ground_energy",
    "local_energy",
    "log_derivatives",
    "log_psi",
    "lower_to_text",
    "psi_ratio",
    "reference_energy",
    "run",
    "sample_annealer",
    "sample_exact",
    "sample_gibbs",
    "sample_metropolis",
    "torus",
    "train",
    "validate_config",
]
