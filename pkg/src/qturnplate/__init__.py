"""Quantum state turnplates on rings with time-reversal-asymmetric couplings."""

from qturnplate.dynamics import TraceSeries, detect_transfer_time, evolve_state, probability_trace, transfer_matrix
from qturnplate.numerics import HermitianEigen, determinant, hermitian_eig, propagator
from qturnplate.ring import GaugeMap, RingSpec, build_hamiltonian, gauge_normalize, total_phase, uniform_ring_spectrum
from qturnplate.symmetry import (
    CyclicSymmetry,
    block_reduce,
    char_poly_check,
    detect_symmetry,
    label_spectrum,
    shift_operator,
    symmetry_labels,
)
from qturnplate.turnplate import MatchingFit, fit_matching, period, verify_turnplate

__all__ = [
    "CyclicSymmetry",
    "GaugeMap",
    "HermitianEigen",
    "MatchingFit",
    "RingSpec",
    "TraceSeries",
    "block_reduce",
    "build_hamiltonian",
    "char_poly_check",
    "detect_symmetry",
    "detect_transfer_time",
    "determinant",
    "evolve_state",
    "fit_matching",
    "gauge_normalize",
    "hermitian_eig",
    "label_spectrum",
    "period",
    "probability_trace",
    "propagator",
    "shift_operator",
    "symmetry_labels",
    "total_phase",
    "transfer_matrix",
    "uniform_ring_spectrum",
    "verify_turnplate",
]
