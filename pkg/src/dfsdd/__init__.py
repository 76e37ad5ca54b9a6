"""Collective-noise dynamical decoupling by optimal qubit state transfers.

Synthesizes nearest-neighbour exchange cycles that turn independent qubit
noise into collective noise, checks the resulting decoherence-free
subspaces and error expansions, and simulates the open-system dynamics
with pseudomode baths.
"""

from .errors import (
    BranchError,
    CapacityError,
    DfsddError,
    IntegratorError,
    NumericalError,
    PropertyViolation,
    SchedulingError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "BranchError",
    "CapacityError",
    "DfsddError",
    "IntegratorError",
    "NumericalError",
    "PropertyViolation",
    "SchedulingError",
    "ValidationError",
]
