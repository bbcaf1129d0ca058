"""Simulation, compilation and cost accounting of hybrid analog-digital
trapped-ion circuits for lattice Yukawa and Schwinger models."""
from __future__ import annotations

from .circuits import Circuit, compile_circuit, schwinger_angles, yukawa_angles
from .cost import count_circuit, digital_estimate
from .evolve import Observer, Trajectory, exact_evolve, run_trotter
from .fock import FockWindow, lowering_matrix, number_matrix, phase_diagonal
from .gates import apply_gate, gate_unitary
from .hardware import TrapConfig, normal_modes
from .models import (SchwingerParams, YukawaParams, initial_state, schwinger_hamiltonian,
                     yukawa_hamiltonian)
from .statespace import RegisterLayout, StateVector, basis_state

__version__ = "0.1.0"

__all__ = [
    "Circuit", "FockWindow", "Observer", "RegisterLayout", "SchwingerParams", "StateVector",
    "Trajectory", "TrapConfig", "YukawaParams", "apply_gate", "basis_state", "compile_circuit",
    "count_circuit", "digital_estimate", "exact_evolve", "gate_unitary", "initial_state",
    "lowering_matrix", "normal_modes", "number_matrix", "phase_diagonal", "run_trotter",
    "schwinger_angles", "schwinger_hamiltonian", "yukawa_angles", "yukawa_hamiltonian",
]
