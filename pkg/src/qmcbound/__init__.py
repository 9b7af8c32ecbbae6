"""Certified lower bounds for Quantum Max Cut ground-state energies.

Second-order-cone and SDP relaxations over mutually consistent few-qubit
marginals, a rounding scheme producing explicit product/singlet states with
an approximation guarantee, and exact-diagonalization plus symmetric-group
oracles that cross-validate every piece.
"""

__version__ = "0.1.0"

from . import analysis, conic, exact, graphs, model, rounding, symmetry
from .graphs import Graph, ScalingConvention

__all__ = [
    "Graph", "ScalingConvention",
    "analysis", "conic", "exact", "graphs", "model", "rounding", "symmetry",
    "__version__",
]
