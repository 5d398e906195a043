"""Entanglement dynamics of charge qubits coupled to a lossy nanomechanical resonator."""

from .model import ModelParams, build_hamiltonian, build_collapse_set
from .evolution import DensityMatrix, PhysicalityError, Trajectory, evolve, physicality_report
from .entanglement import concurrence, pairwise_tangles, tangle_two_qubit, von_neumann_entropy
from .convex_roof import i_tangle_convex_roof
from .analytic import eq4_tangle, single_excitation_oracle

__all__ = [
    "ModelParams",
    "build_hamiltonian",
    "build_collapse_set",
    "DensityMatrix",
    "PhysicalityError",
    "Trajectory",
    "evolve",
    "physicality_report",
    "concurrence",
    "pairwise_tangles",
    "tangle_two_qubit",
    "von_neumann_entropy",
    "i_tangle_convex_roof",
    "eq4_tangle",
    "single_excitation_oracle",
]
__version__ = "0.1.0"
