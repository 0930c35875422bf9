"""Built-in scenarios: a study, its default parameters and its checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import studies


@dataclass(frozen=True)
class Check:
    check_id: str
    measured: object
    expected: object
    rule: str = "abs"
    note: str = ""


@dataclass
class Outcome:
    checks: list[Check]
    series: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    module: str
    description: str
    anchor: str
    defaults: dict
    runner: Callable[[dict, int | None], Outcome]
    sampling: bool = True


def _max(check_id, value, note=""):
    return Check(check_id, float(value), 0.0, "abs", note)


# -- operator algebras -----------------------------------------------------

def _vn_blocks(p, seed):
    sizes = [int(k) for k in p["sizes"]]
    s = studies.study_vn_blocks(seed, tuple(sizes)).values
    return Outcome([
        Check("vn.sector_count", s["sector_count"], len(sizes), "eq"),
        Check("vn.multiplicities", s["multiplicities"], sorted(sizes), "eq"),
        Check("vn.center_dim", s["center_dim"], len(sizes), "eq"),
        Check("vn.commutant_dim", s["commutant_dim"], len(sizes), "eq"),
        Check("vn.bicommutant_dim", s["bicommutant_dim"], int(sum(k * k for k in sizes)), "eq"),
        Check("vn.dirac_jauch", s["dirac_jauch"], True, "eq"),
        _max("vn.projector_idempotence", s["projector_error"]),
    ])


def _vn_suite(p, seed):
    st = studies.study_vn_suite(seed)
    return Outcome([
        Check("vn.oracle_dim_mismatch", st.values["dim_mismatch"], 0, "eq",
              f"{st.values['cases']} cases against a dense nullspace oracle"),
        Check("vn.dirac_jauch_vs_abelian", st.values["dj_mismatch"], 0, "eq"),
    ], st.series)


# -- group and exponents ---------------------------------------------------

def _group(p, seed):
    s = studies.study_group_laws(seed, int(p["samples"]), int(p["dim"])).values
    return Outcome([_max(f"galilei.{k}", s[k]) for k in ("associativity", "inverse", "identity", "action")])


def _cocycle(p, seed):
    s = studies.study_cocycle(seed, int(p["samples"]), float(p["M"]), float(p["hbar"])).values
    return Outcome([
        _max("cocycle.bargmann_residual", s["bargmann_residual"]),
        Check("cocycle.corrupted_residual", s["corrupted_residual"], 0.1, "ge"),
        _max("cocycle.normalization", s["normalization"]),
    ])


def _witness(p, seed):
    st = studies.study_witness(seed, int(p["samples"]), float(p["M"]), float(p["hbar"]),
                               float(p["v"]), float(p["a"]))
    s = st.values
    return Outcome([
        Check("witness.gap", s["fixed_gap"], s["fixed_expected"]),
        _max("witness.formula", s["formula_error"]),
        _max("witness.coboundary_invariance", s["coboundary_invariance"]),
        Check("witness.found", s["witness_found"], True, "eq"),
        Check("witness.zero_exponent_silent", s["zero_exponent_witness"], False, "eq"),
    ], artifacts={"witness": st.info["witness"]})


def _extension(p, seed):
    s = studies.study_extension(seed, int(p["samples"]), float(p["M"])).values
    return Outcome([
        _max("extension.associativity", s["associativity"]),
        Check("extension.corrupted_associativity", s["corrupted_associativity"], 1e-6, "ge"),
        _max("extension.inverse", s["inverse"]),
    ])


def _obstruction(p, seed):
    s = studies.study_mass_obstruction(seed, int(p["samples"]), float(p["M1"]), float(p["M2"])).values
    return Outcome([
        Check("obstruction.found", s["obstructed"], True, "eq"),
        Check("obstruction.gap", s["gap"], s["expected_gap"]),
        Check("obstruction.same_mass_silent", s["same_mass_obstructed"], False, "eq"),
    ])


# -- quantum dynamics ------------------------------------------------------

def _phase(p, seed):
    Ns = [int(p["N"])] + ([int(p["refine_N"])] if int(p["refine_N"]) > 0 else [])
    st = studies.study_composition_phase(tuple(Ns), float(p["L"]))
    s = st.values
    N = Ns[0]
    checks = [
        Check("qdyn.phase", s[f"phase_N{N}"], s["expected"], "phase"),
        Check("qdyn.overlap", s[f"overlap_N{N}"], 1 - 1e-6, "ge"),
    ]
    if len(Ns) > 1:
        checks.append(Check("qdyn.refinement", s[f"error_N{Ns[1]}"], s[f"error_N{N}"], "floor",
                            "error at the finer grid must not exceed the coarse one"))
    else:
        checks.append(Check("qdyn.refinement", None, None, "skip", "refine_N = 0"))
    return Outcome(checks, st.series)


def _sectors(p, seed):
    s = studies.study_mass_sectors(int(p["N"]), float(p["L"]), None, float(p["M1"]),
                                   float(p["M2"]), seed).values
    return Outcome([
        Check("qdyn.sector_gap", s["gap"], s["expected"], "phase"),
        _max("qdyn.sector_coboundary", s["coboundary_shift"]),
        Check("qdyn.sector_overlap", s["min_overlap"], 1 - 1e-6, "ge"),
    ])


def _extended_rep(p, seed):
    s = studies.study_extended_representation(int(p["N"]), float(p["L"]), int(p["N_lam"])).values
    return Outcome([
        _max("qdyn.extended_composition", s["composition"]),
        _max("qdyn.slice_restriction", s["slice_error"]),
        _max("qdyn.leakage", s["leakage"]),
    ])


# -- classical extended dynamics -------------------------------------------

def _extdyn(p, seed):
    st = studies.study_extdyn(seed, float(p["dt"]), float(p["T"]))
    s = st.values
    return Outcome([
        _max("extdyn.raw_residual", s["raw_residual"]),
        _max("extdyn.symmetry_residual", s["symmetry_residual"]),
        Check("extdyn.scaling_order", s["min_order"], 4.0),
        Check("extdyn.ablation_ratio", s["ablation_ratio"], 1e6, "ge"),
    ], st.series)


def _action(p, seed):
    s = studies.study_extdyn(seed, float(p["dt"]), float(p["T"]), scaling_dts=(0.02, 0.01)).values
    return Outcome([
        _max("extdyn.free_lambda", s["free_lambda_error"]),
        _max("extdyn.action_cost", s["action_cost_error"]),
    ])


# -- lattice electrodynamics -----------------------------------------------

def _maxwell(p, seed):
    st = studies.study_maxwell_constraints(int(p["radius"]), int(p["l_max"]), float(p["dt"]),
                                           int(p["steps"]))
    s = st.values
    checks = [
        _max("maxwell.weight_sum", s["weight_sum_error"]),
        _max("maxwell.harmonic_gram", s["harmonic_gram_error"]),
        _max("maxwell.div_curl", s["div_curl"]),
        _max("maxwell.initial_gauss", s["initial_gauss"]),
        Check("maxwell.E00", s["E00"], 1 / np.sqrt(4 * np.pi)),
        _max("maxwell.E_higher", s["E_higher_max"]),
        _max("maxwell.static_drift", s["static_E_drift"]),
        _max("maxwell.gauss_drift", s["gauss_drift"], "coulomb gauge, oscillating blob"),
        _max("maxwell.temporal_gauss_drift", s["temporal_gauss_drift"]),
        _max("maxwell.f_drift", s["f_drift"]),
        _max("maxwell.G_lm_drift", s["G_lm_drift"]),
        _max("maxwell.temporal_lambda", s["temporal_lambda_drift"]),
        _max("maxwell.Q_drift", s["Q_drift"]),
        _max("maxwell.Q_f00", s["Q_minus_f00"]),
        Check("maxwell.lambda_rate_order", s["lambda_rate_min_order"], 2.0),
        _max("maxwell.mismatch", s["mismatch_G_error"]),
        _max("maxwell.dipole_Q", s["dipole_Q"]),
        _max("maxwell.dipole_f00", s["dipole_f00"]),
        Check("maxwell.energy_order", s["energy_order"], 2.0),
    ]
    return Outcome(checks, st.series, {"geometry": st.info})


def _charge(p, seed):
    s = studies.study_charge_operator(int(p["N"]), float(p["L"]), float(p["k"]), seed).values
    return Outcome([
        _max("charge.eigenvalue", s["eigen_residual"]),
        _max("charge.commutator", s["commutator_residual"]),
        _max("charge.constant", s["constant_image"]),
    ])


def _center(p, seed):
    N, k = int(p["N_lam"]), int(p["k"])
    s = studies.study_center_demo(N, k, seed).values
    return Outcome([
        Check("vn.restricted_sectors", s["restricted_sectors"], N, "eq"),
        Check("vn.restricted_multiplicities", s["restricted_multiplicities"], [k] * N, "eq"),
        Check("vn.unrestricted_sectors", s["unrestricted_sectors"], 1, "eq"),
        _max("vn.center_charge_residual", s["charge_center_residual"]),
    ])


SCENARIOS: dict[str, Scenario] = {s.name: s for s in [
    Scenario("vn-blocks-2-3", "vnalg", "Sectors of a direct sum of full matrix blocks",
             "superselection sectors as minimal central projections of the observable algebra",
             {"sizes": [2, 3]}, _vn_blocks),
    Scenario("vn-dirac-jauch", "vnalg",
             "Commutant, bicommutant and center against a dense oracle; Dirac-Jauch vs abelian commutant",
             "Dirac-Jauch condition: the commutant lies inside the algebra",
             {}, _vn_suite, sampling=False),
    Scenario("galilei-group-laws", "galilei", "Associativity, inverses and action of the Galilei group",
             "Galilei group composition law", {"samples": 1000, "dim": 3}, _group),
    Scenario("bargmann-cocycle", "cocycle", "Cocycle identity for the mass exponent and a corrupted variant",
             "multiplier exponent cocycle identity", {"samples": 10000, "M": 1.0, "hbar": 1.0}, _cocycle),
    Scenario("bargmann-witness", "cocycle", "Boost/translation witness that the mass exponent is not trivial",
             "antisymmetric part on the abelian boost-translation subgroup",
             {"samples": 1000, "M": 1.0, "hbar": 1.0, "v": 1.0, "a": 1.0}, _witness),
    Scenario("central-extension", "cocycle", "Group law of the central extension by the reals",
             "central extension by the multiplier exponent", {"samples": 1000, "M": 1.0}, _extension),
    Scenario("mass-obstruction", "cocycle", "Inequivalent exponents for two total masses",
             "mass superselection: no ray representation on a sum of mass sectors",
             {"samples": 1000, "M1": 1.0, "M2": 2.0}, _obstruction),
    Scenario("qdyn-composition-phase", "qdyn", "Measured composition phase of the unitary implementers",
             "Bargmann phase in the composition of Galilei unitaries",
             {"N": 512, "refine_N": 1024, "L": 40.0}, _phase, sampling=False),
    Scenario("qdyn-mass-sectors", "qdyn", "Phase gap between total-mass sectors, invariant under coboundaries",
             "mass-dependent phase difference between sectors",
             {"N": 512, "L": 40.0, "M1": 1.0, "M2": 2.0}, _sectors),
    Scenario("qdyn-extended-representation", "qdyn",
             "Extended system with mass as a momentum: a true representation of the central extension",
             "extended quantum dynamics with a mass-conjugate coordinate",
             {"N": 256, "L": 40.0, "N_lam": 64}, _extended_rep, sampling=False),
    Scenario("extdyn-symmetry", "extdyn", "Extended classical symmetry, dt^4 scaling and ablation",
             "extended classical equations and the extended group action", {"dt": 1e-3, "T": 2.0}, _extdyn),
    Scenario("extdyn-action-cost", "extdyn", "Free-particle lambda drift and the M dLambda action term",
             "action term M dLambda/dt", {"dt": 1e-3, "T": 2.0}, _action),
    Scenario("maxwell-constraints", "maxwell",
             "Gauss and boundary-multipole constraints, charge and lambda dynamics on the lattice ball",
             "constraints of electrodynamics with boundary multipole pairs",
             {"radius": 12, "l_max": 2, "dt": 0.1, "steps": 1000}, _maxwell, sampling=False),
    Scenario("maxwell-charge-operator", "maxwell", "Charge as -i sqrt(4 pi) d/dlambda_00 on the boundary factor",
             "quantized charge operator on the monopole boundary variable",
             {"N": 256, "L": float(2 * np.pi * 8), "k": 1.0}, _charge),
    Scenario("maxwell-center-demo", "maxwell",
             "Charge becomes central once lambda_00 multiplication is removed",
             "charge superselection from the inaccessible boundary coordinate",
             {"N_lam": 4, "k": 2}, _center),
]}


def list_scenarios() -> list[Scenario]:
    """Catalog in a fixed order (insertion order of the table)."""
    return list(SCENARIOS.values())


def get(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; see `sslab list`") from None
