"""Gaussian simulation of entanglement farming in a vibrating cavity."""

from cavityfarm.cavity import CavityConfig
from cavityfarm.gaussian import (
    GaussianState,
    IntegratorConfig,
    log_negativity,
    symplectic_eigenvalues,
    vacuum_state,
)

__version__ = "0.1.0"

__all__ = [
    "CavityConfig",
    "GaussianState",
    "IntegratorConfig",
    "log_negativity",
    "symplectic_eigenvalues",
    "vacuum_state",
    "__version__",
]
