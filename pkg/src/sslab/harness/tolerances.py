"""Default tolerance per check id.

Rules:
  abs    |measured - expected| <= tol
  phase  |wrap(measured - expected)| <= tol, wrap onto (-pi, pi]
  eq     measured == expected (exact; integers, booleans, lists)
  ge     measured >= expected (threshold checks; tol unused)
  floor  measured <= max(expected, tol) (refinement must not worsen the
         error unless both sit below the roundoff floor ``tol``)

``--tolerance-scale`` multiplies tol for abs, phase and floor rules only.
"""
from __future__ import annotations

TOLERANCE_TABLE_VERSION = "2026.10-1"

TOLERANCES: dict[str, float] = {
    # operator algebras
    "vn.projector_idempotence": 1e-9,
    "vn.center_charge_residual": 1e-9,
    # group law
    "galilei.associativity": 1e-12,
    "galilei.inverse": 1e-12,
    "galilei.identity": 1e-12,
    "galilei.action": 1e-12,
    # exponents
    "cocycle.bargmann_residual": 1e-10,
    "cocycle.normalization": 1e-12,
    "witness.gap": 1e-12,
    "witness.formula": 1e-12,
    "witness.coboundary_invariance": 1e-10,
    "extension.associativity": 1e-12,
    "extension.inverse": 1e-12,
    "obstruction.gap": 1e-12,
    # quantum dynamics
    "qdyn.phase": 1e-3,
    "qdyn.refinement": 1e-12,
    "qdyn.sector_gap": 2e-3,
    "qdyn.sector_coboundary": 1e-10,
    "qdyn.extended_composition": 1e-10,
    "qdyn.slice_restriction": 1e-6,
    "qdyn.leakage": 1e-8,
    # classical extended dynamics
    "extdyn.raw_residual": 1e-6,
    "extdyn.symmetry_residual": 1e-6,
    "extdyn.scaling_order": 0.3,
    "extdyn.free_lambda": 1e-9,
    "extdyn.action_cost": 1e-9,
    # lattice electrodynamics
    "maxwell.weight_sum": 1e-3,
    "maxwell.harmonic_gram": 1e-2,
    "maxwell.div_curl": 1e-12,
    "maxwell.initial_gauss": 1e-12,
    "maxwell.E00": 1e-2,
    "maxwell.E_higher": 1e-2,
    "maxwell.static_drift": 1e-10,
    "maxwell.gauss_drift": 1e-10,
    "maxwell.temporal_gauss_drift": 1e-10,
    "maxwell.f_drift": 1e-12,
    "maxwell.G_lm_drift": 1e-10,
    "maxwell.temporal_lambda": 1e-12,
    "maxwell.Q_drift": 1e-12,
    "maxwell.Q_f00": 1e-2,
    "maxwell.lambda_rate_order": 0.2,
    "maxwell.mismatch": 1e-12,
    "maxwell.dipole_Q": 1e-12,
    "maxwell.dipole_f00": 1e-2,
    "maxwell.energy_order": 0.3,
    "charge.eigenvalue": 1e-10,
    "charge.commutator": 1e-8,
    "charge.constant": 1e-12,
}

SCALED_RULES = ("abs", "phase", "floor")


def tolerance(check_id: str, overrides: dict | None = None) -> float:
    """Config override if present, else the table value (0 when absent)."""
    if overrides and check_id in overrides:
        return float(overrides[check_id])
    return TOLERANCES.get(check_id, 0.0)
