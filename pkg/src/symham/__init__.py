"""Recover symmetric spin-chain Hamiltonians from a single eigenstate."""
from .operators import (
    HermitianOperator,
    PauliString,
    PauliSum,
    StateVector,
    commutes,
    conjugate_state,
    materialize_pauli_string,
    parity_x,
    partial_spin_squared,
    total_spin_component,
    total_spin_squared,
)

__version__ = "0.1.0"

__all__ = [
    "HermitianOperator",
    "PauliString",
    "PauliSum",
    "StateVector",
    "commutes",
    "conjugate_state",
    "materialize_pauli_string",
    "parity_x",
    "partial_spin_squared",
    "total_spin_component",
    "total_spin_squared",
]
