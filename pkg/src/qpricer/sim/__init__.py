"""Discrete-event simulation of the two-class priority queue."""

from .dynamics import DynamicsTrace, adaptive_dynamics
from .engine import RepStats, SimulationError, run_replication
from .runner import (
    ADAPTIVE,
    Estimate,
    SimConfig,
    SimulationResult,
    ValidationCheck,
    ValidationReport,
    replicate,
    run_sim,
    validate,
)

__all__ = [
    "ADAPTIVE",
    "DynamicsTrace",
    "Estimate",
    "RepStats",
    "SimConfig",
    "SimulationError",
    "SimulationResult",
    "ValidationCheck",
    "ValidationReport",
    "adaptive_dynamics",
    "replicate",
    "run_replication",
    "run_sim",
    "validate",
]
