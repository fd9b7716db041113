"""Two artificial atoms on a 1-D transmission line.

Exact (truncated-mode) and perturbative excitation dynamics, causality
diagnostics, and flux-qubit experiment feasibility analysis.
"""

from .model import (
    Discretization,
    ModelParams,
    RunConfig,
    SIParams,
    UnitScales,
    coupling_from_dipole,
    dipole_from_coupling,
    to_natural_units,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "Discretization",
    "ModelParams",
    "RunConfig",
    "SIParams",
    "UnitScales",
    "coupling_from_dipole",
    "dipole_from_coupling",
    "to_natural_units",
    "validate",
    "__version__",
]
