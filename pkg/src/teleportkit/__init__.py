"""Exact simulation of quantum teleportation, its two-step decomposition, and classical analogues."""

from teleportkit.core import (
    BELL_BASIS,
    X_BASIS,
    Z_BASIS,
    BlochParams,
    DensityMatrix,
    DomainError,
    Gate,
    StateVector,
    apply_gate,
    bell_state,
    bloch_state,
    concurrence,
    density_from,
    fidelity,
    measure,
    mix,
    partial_trace,
    tensor,
)
from teleportkit.kernels import BACKEND
from teleportkit.protocols import ResourceKind, Transcript, run_standard, run_two_step

__version__ = "0.1.0"
