"""Lattice electrodynamics with boundary multipole channels."""
from .fields import (BoundaryChannelState, FieldState, PoissonError, SourceContinuityError,
                     Sources, Stepper, boundary_multipoles, central_charge, constraint_report,
                     drift_summary, energy, gauss_residual, initial_state, neutral_dipole,
                     oscillating_blob, run, step, total_charge)
from .lattice import LatticeGeometry
from .quantum import (BoundaryWaveFunction, LambdaGrid, apply_charge_operator, center_demo,
                      commutator_residual)

__all__ = [
    "BoundaryChannelState", "BoundaryWaveFunction", "FieldState", "LambdaGrid", "LatticeGeometry",
    "PoissonError", "SourceContinuityError", "Sources", "Stepper", "apply_charge_operator",
    "boundary_multipoles", "center_demo", "central_charge", "commutator_residual",
    "constraint_report", "drift_summary", "energy", "gauss_residual", "initial_state",
    "neutral_dipole", "oscillating_blob", "run", "step", "total_charge",
]
