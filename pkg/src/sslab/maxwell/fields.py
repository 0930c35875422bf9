"""Lattice electrodynamics with boundary multipole channels.

Canonical pairs are (A, -E) on interior links and (lambda_lm, f_lm) on the
boundary.  The update is kick-drift-kick leapfrog:

    E  += dt/2 (curl^T curl A) - int j dt        (half step)
    A  -= dt (E + grad phi)                      (phi at the half step)
    lam_lm -= dt phi_lm
    E  += dt/2 (curl^T curl A) - int j dt        (half step)

Currents enter through their exact time integral over each half step, and
charge densities are evaluated in closed form, so the discrete continuity
equation and the identity div curl^T = 0 keep div E - rho fixed to roundoff.
The boundary normal field never changes: currents vanish on boundary faces
and plaquettes touching the wall are absent.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .lattice import LatticeGeometry

Gauge = Literal["temporal", "coulomb"]
CONTINUITY_TOL = 1e-12
POISSON_RTOL = 1e-9
STABILITY_LIMIT = 2.0 / np.sqrt(12.0)


class PoissonError(RuntimeError):
    """Linear solve for phi failed its residual check."""


class SourceContinuityError(ValueError):
    """Prescribed charge and current violate drho/dt + div j = 0."""


# -- sources ---------------------------------------------------------------

@dataclass
class Sources:
    """rho(t) = q0 - (div j0) sin(w t)/w + t * drift,  j(t) = j0 cos(w t).

    ``drift`` is a charge change with no current behind it; it exists only to
    exercise the continuity check and should be zero for physical sources.
    """

    geometry: LatticeGeometry
    q0: np.ndarray
    j0: np.ndarray | None = None
    omega: float = 1.0
    drift: np.ndarray | None = None

    def __post_init__(self):
        g = self.geometry
        self.q0 = np.asarray(self.q0, dtype=float).reshape(g.n_sites)
        self.j0 = np.zeros(g.n_links) if self.j0 is None else np.asarray(self.j0, float).reshape(g.n_links)
        self.drift = np.zeros(g.n_sites) if self.drift is None else np.asarray(self.drift, float)
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        self._div_j0 = g.div @ self.j0

    def _S(self, t: float) -> float:
        return np.sin(self.omega * t) / self.omega

    def rho(self, t: float) -> np.ndarray:
        return self.q0 - self._div_j0 * self._S(t) + t * self.drift

    def current(self, t: float) -> np.ndarray:
        return self.j0 * np.cos(self.omega * t)

    def impulse(self, t0: float, t1: float) -> np.ndarray:
        """Exact integral of j over [t0, t1]."""
        return self.j0 * (self._S(t1) - self._S(t0))

    def continuity_residual(self, t0: float, t1: float) -> float:
        """max |rho(t1) - rho(t0) + div int j| per site."""
        gap = self.rho(t1) - self.rho(t0) + self.geometry.div @ self.impulse(t0, t1)
        return float(np.abs(gap).max())

    def boundary_current(self) -> np.ndarray:
        """Normal current on boundary faces; identically zero by construction."""
        return np.zeros(self.geometry.n_faces)

    @property
    def total(self) -> float:
        return float(self.q0.sum())


def point_charges(geometry: LatticeGeometry, charges: dict) -> Sources:
    """Static charges at integer sites, ``{(i, j, k): q}``."""
    q = np.zeros(geometry.n_sites)
    for s, value in charges.items():
        idx = geometry.site_index(s)
        if idx < 0:
            raise ValueError(f"site {s} lies outside the lattice ball")
        q[idx] += value
    return Sources(geometry, q)


def central_charge(geometry: LatticeGeometry, Q: float = 1.0) -> Sources:
    return point_charges(geometry, {(0, 0, 0): Q})


def neutral_dipole(geometry: LatticeGeometry, separation: int = 2, axis: int = 2) -> Sources:
    s = np.zeros(3, dtype=int)
    s[axis] = separation
    return point_charges(geometry, {tuple(s): 1.0, tuple(-s): -1.0})


def oscillating_blob(geometry: LatticeGeometry, radius: float = 4.0, amplitude: float = 0.2,
                     omega: float = 1.0, direction=None, q0: dict | None = None) -> Sources:
    """Charge blob driven by a smooth current inside ``radius``.

    ``direction=None`` gives a radial breathing current; a 3-vector gives a
    blob sloshing along that axis.  ``q0`` adds static point charges.
    """
    mid = geometry.link_midpoints
    r = np.linalg.norm(mid, axis=1)
    profile = np.where(r < radius, np.sin(np.pi * r / radius) ** 2, 0.0)
    e = np.eye(3)[geometry.link_dir]
    if direction is None:
        with np.errstate(invalid="ignore", divide="ignore"):
            rhat = np.where(r[:, None] > 0, mid / r[:, None], 0.0)
        comp = np.einsum("ij,ij->i", rhat, e)
    else:
        u = np.asarray(direction, dtype=float)
        comp = e @ (u / np.linalg.norm(u))
    base = point_charges(geometry, q0 or {})
    return Sources(geometry, base.q0, amplitude * profile * comp, omega)


def no_sources(geometry: LatticeGeometry) -> Sources:
    return Sources(geometry, np.zeros(geometry.n_sites))


# -- state -----------------------------------------------------------------

@dataclass
class FieldState:
    """Bulk fields; ``E_bnd`` is the outward normal E on boundary faces."""

    geometry: LatticeGeometry
    sources: Sources
    A: np.ndarray
    E: np.ndarray
    E_bnd: np.ndarray
    t: float = 0.0
    phi: np.ndarray | None = None

    def copy(self) -> "FieldState":
        return replace(self, A=self.A.copy(), E=self.E.copy(), E_bnd=self.E_bnd.copy(),
                       phi=None if self.phi is None else self.phi.copy())

    @property
    def rho(self) -> np.ndarray:
        return self.sources.rho(self.t)

    @property
    def j(self) -> np.ndarray:
        return self.sources.current(self.t)


@dataclass
class BoundaryChannelState:
    """lambda_lm and f_lm in the real harmonic basis ordered as ``geometry.lm``."""

    lam: np.ndarray
    f: np.ndarray

    def copy(self) -> "BoundaryChannelState":
        return BoundaryChannelState(self.lam.copy(), self.f.copy())


# -- elliptic solves -------------------------------------------------------

class PoissonSolver:
    """Neumann problem on the interior-link graph, solution with zero mean."""

    def __init__(self, geometry: LatticeGeometry):
        self.geometry = geometry
        K = (geometry.h ** 3 * (geometry.grad.T @ geometry.grad)).tocsc()
        self._K = K
        self._lu = splu(K[1:, 1:].tocsc())

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """phi with K phi = rhs, where K = -div grad; rhs is projected to zero sum."""
        rhs = np.asarray(rhs, dtype=float)
        b = rhs - rhs.mean()
        phi = np.zeros_like(b)
        phi[1:] = self._lu.solve(b[1:])
        phi -= phi.mean()
        res = np.abs(self._K @ phi - b).max()
        scale = max(np.abs(b).max(), 1e-300)
        if not np.isfinite(res) or res > POISSON_RTOL * max(scale, 1.0):
            raise PoissonError(f"Poisson residual {res:.3g}")
        return phi


def electrostatic_potential(geometry: LatticeGeometry, q: np.ndarray) -> np.ndarray:
    """phi for charges q with phi = 0 just outside the ball (grounded wall)."""
    h = geometry.h
    K = h ** 3 * (geometry.grad.T @ geometry.grad)
    counts = np.bincount(geometry.face_site, minlength=geometry.n_sites)
    K = (K + sp.diags(h * counts.astype(float))).tocsc()
    phi = splu(K).solve(np.asarray(q, dtype=float))
    if np.abs(K @ phi - q).max() > POISSON_RTOL * max(1.0, np.abs(q).max()):
        raise PoissonError("electrostatic solve failed")
    return phi


# -- construction ----------------------------------------------------------

def initial_state(geometry: LatticeGeometry, sources: Sources,
                  f_offset=0.0, t0: float = 0.0) -> tuple[FieldState, BoundaryChannelState]:
    """Electrostatic data for rho(t0) with A = 0, lambda = 0, f_lm = E_lm + offset."""
    phi = electrostatic_potential(geometry, sources.rho(t0))
    E = -(geometry.grad @ phi)
    E_bnd = phi[geometry.face_site] / geometry.h
    state = FieldState(geometry, sources, np.zeros(geometry.n_links), E, E_bnd, t0)
    nlm = len(geometry.lm)
    f = boundary_multipoles(state, "E") + np.broadcast_to(np.asarray(f_offset, float), (nlm,))
    return state, BoundaryChannelState(np.zeros(nlm), f)


def vacuum_state(geometry: LatticeGeometry) -> tuple[FieldState, BoundaryChannelState]:
    return initial_state(geometry, no_sources(geometry))


def add_transverse_field(state: FieldState, seed=0, amplitude: float = 0.1,
                         width: float = 3.0) -> FieldState:
    """Add a divergence-free E = curl^T b from a smooth random plaquette field."""
    g = state.geometry
    rng = np.random.default_rng(seed)
    inc = abs(g.curl_incidence)
    centres = (inc @ g.link_midpoints) / 4.0
    envelope = np.exp(-np.sum(centres ** 2, axis=1) / (2 * width ** 2))
    b = amplitude * envelope * rng.standard_normal(g.n_plaquettes)
    out = state.copy()
    out.E = out.E + g.curl.T @ b
    return out


# -- stepping --------------------------------------------------------------

class Stepper:
    """Leapfrog integrator with cached operators for one geometry."""

    def __init__(self, geometry: LatticeGeometry, gauge: Gauge = "temporal"):
        if gauge not in ("temporal", "coulomb"):
            raise ValueError(f"unknown gauge {gauge!r}")
        self.geometry = geometry
        self.gauge = gauge
        self._poisson = PoissonSolver(geometry) if gauge == "coulomb" else None

    def potential(self, state: FieldState, t: float | None = None) -> np.ndarray:
        g = self.geometry
        if self.gauge == "temporal":
            return np.zeros(g.n_sites)
        t = state.t if t is None else t
        rhs = state.sources.rho(t) - g.boundary_div @ state.E_bnd
        return self._poisson.solve(rhs)

    def step(self, state: FieldState, channels: BoundaryChannelState,
             dt: float) -> tuple[FieldState, BoundaryChannelState]:
        g = self.geometry
        if not 0 < dt < STABILITY_LIMIT * g.h:
            raise ValueError(f"dt must lie in (0, {STABILITY_LIMIT * g.h:.4g})")
        src = state.sources
        t0, th, t1 = state.t, state.t + 0.5 * dt, state.t + dt
        if src.continuity_residual(t0, t1) > CONTINUITY_TOL * max(1.0, np.abs(src.q0).max()):
            raise SourceContinuityError(f"continuity violated on [{t0}, {t1}]")
        A = state.A.copy()
        E = state.E + 0.5 * dt * (g.curlcurl @ A) - src.impulse(t0, th)
        mid = FieldState(g, src, A, E, state.E_bnd, th)
        phi = self.potential(mid)
        A = A - dt * (E + g.grad @ phi)
        lam = channels.lam - dt * multipoles_of_sites(g, phi)
        E = E + 0.5 * dt * (g.curlcurl @ A) - src.impulse(th, t1)
        new = FieldState(g, src, A, E, state.E_bnd.copy(), t1, phi)
        return new, BoundaryChannelState(lam, channels.f.copy())


def step(state: FieldState, channels: BoundaryChannelState, gauge: Gauge,
         dt: float) -> tuple[FieldState, BoundaryChannelState]:
    """Single leapfrog step; builds a fresh Stepper (use Stepper for loops)."""
    return Stepper(state.geometry, gauge).step(state, channels, dt)


# -- diagnostics -----------------------------------------------------------

def divergence(state: FieldState) -> np.ndarray:
    g = state.geometry
    return g.div @ state.E + g.boundary_div @ state.E_bnd


def gauss_residual(state: FieldState, rho: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Per-site div E - rho and its largest magnitude."""
    rho = state.rho if rho is None else np.asarray(rho, dtype=float)
    G = divergence(state) - rho
    return G, float(np.abs(G).max())


def multipoles_of_sites(geometry: LatticeGeometry, values: np.ndarray) -> np.ndarray:
    """sum_f w_f Y_lm(f) v(site of f) for a site field v."""
    face_vals = np.asarray(values)[geometry.face_site]
    return geometry.harmonics @ (geometry.face_weights * face_vals)


def boundary_multipoles(state: FieldState, which: Literal["E", "phi"] = "E",
                        phi: np.ndarray | None = None) -> np.ndarray:
    """Multipole coefficients of the boundary flux or potential.

    For ``E`` the coefficient is sum_f Y_lm Phi_f with Phi_f = h^2 n.E the
    face flux, i.e. the solid-angle weighted flux density, so E_00 is the
    enclosed flux over sqrt(4 pi).  For ``phi`` the site potential next to
    each face is weighted by its solid angle.
    """
    g = state.geometry
    if which == "E":
        return g.harmonics @ (g.h ** 2 * state.E_bnd)
    if which == "phi":
        values = phi if phi is not None else (state.phi if state.phi is not None
                                              else np.zeros(g.n_sites))
        return multipoles_of_sites(g, values)
    raise ValueError("which must be 'E' or 'phi'")


@dataclass(frozen=True)
class ConstraintReport:
    t: float
    gauss_max: float
    G_lm: np.ndarray

    @property
    def G_lm_max(self) -> float:
        return float(np.abs(self.G_lm).max())


def constraint_report(state: FieldState, channels: BoundaryChannelState) -> ConstraintReport:
    return ConstraintReport(state.t, gauss_residual(state)[1],
                            boundary_multipoles(state, "E") - channels.f)


@dataclass(frozen=True)
class ChargeReport:
    Q: float
    from_f00: float
    from_flux: float


def total_charge(state: FieldState, channels: BoundaryChannelState | None = None) -> ChargeReport:
    """Lattice sum of rho, with sqrt(4 pi) f_00 and the boundary flux as cross-checks."""
    g = state.geometry
    Q = float(state.rho.sum())
    flux = float(g.h ** 2 * state.E_bnd.sum())
    f00 = float("nan") if channels is None else float(np.sqrt(4 * np.pi) * channels.f[g.lm_index(0, 0)])
    return ChargeReport(Q, f00, flux)


def energy(state: FieldState) -> float:
    """h^3 (|E|^2 + |curl A|^2)/2 with boundary faces as half cells."""
    g = state.geometry
    B = g.curl @ state.A
    return float(g.h ** 3 * (0.5 * state.E @ state.E + 0.5 * B @ B
                             + 0.25 * state.E_bnd @ state.E_bnd))


# -- long runs -------------------------------------------------------------

@dataclass
class History:
    """Time series sampled every ``record_every`` steps."""

    lm: list
    t: list = field(default_factory=list)
    gauss_max: list = field(default_factory=list)
    G_lm: list = field(default_factory=list)
    f: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    Q: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    phi00: list = field(default_factory=list)

    def arrays(self) -> dict:
        return {k: np.asarray(v) for k, v in self.__dict__.items() if k != "lm"}

    def columns(self) -> tuple[list[str], np.ndarray]:
        """Flat CSV layout."""
        a = self.arrays()
        tags = [f"{l}_{m}" for l, m in self.lm]
        names = ["t", "gauss_max", "Q", "energy"]
        cols = [a["t"], a["gauss_max"], a["Q"], a["energy"]]
        if len(self.phi00):
            names.append("phi_0_0")
            cols.append(a["phi00"])
        for key in ("G_lm", "f", "lam"):
            names += [f"{key}_{tag}" for tag in tags]
            cols += list(a[key].T)
        return names, np.column_stack(cols)


def _record(hist: History, stepper: Stepper, state: FieldState, ch: BoundaryChannelState,
            track_phi: bool) -> None:
    rep = constraint_report(state, ch)
    hist.t.append(state.t)
    hist.gauss_max.append(rep.gauss_max)
    hist.G_lm.append(rep.G_lm)
    hist.f.append(ch.f.copy())
    hist.lam.append(ch.lam.copy())
    hist.Q.append(total_charge(state).Q)
    hist.energy.append(energy(state))
    if track_phi:
        phi = stepper.potential(state)
        hist.phi00.append(float(multipoles_of_sites(state.geometry, phi)[0]))


def run(state: FieldState, channels: BoundaryChannelState, gauge: Gauge, dt: float, steps: int,
        record_every: int = 1, track_phi: bool = False):
    """Advance ``steps`` leapfrog steps, returning final state, channels and history.

    ``track_phi`` also records phi_00 at the sample times (one extra solve each).
    """
    stepper = Stepper(state.geometry, gauge)
    hist = History(list(state.geometry.lm))
    _record(hist, stepper, state, channels, track_phi)
    for k in range(1, steps + 1):
        state, channels = stepper.step(state, channels, dt)
        if k % record_every == 0 or k == steps:
            _record(hist, stepper, state, channels, track_phi)
    return state, channels, hist


@dataclass(frozen=True)
class DriftSummary:
    gauss_drift: float
    f_drift: float
    G_lm_drift: float
    Q_drift: float
    gauss_initial: float
    G_lm_initial: float


def drift_summary(hist: History) -> DriftSummary:
    a = hist.arrays()
    return DriftSummary(
        gauss_drift=float(np.abs(a["gauss_max"] - a["gauss_max"][0]).max()),
        f_drift=float(np.abs(a["f"] - a["f"][0]).max()),
        G_lm_drift=float(np.abs(a["G_lm"] - a["G_lm"][0]).max()),
        Q_drift=float(np.abs(a["Q"] - a["Q"][0]).max()),
        gauss_initial=float(a["gauss_max"][0]),
        G_lm_initial=float(np.abs(a["G_lm"][0]).max()),
    )


def lambda_rate_error(hist: History, dt: float) -> float:
    """max |central difference of lambda_00 + phi_00| over interior samples.

    Needs a history recorded every step with ``track_phi``.
    """
    lam = np.asarray(hist.lam)[:, 0]
    phi = np.asarray(hist.phi00)
    if phi.size != lam.size:
        raise ValueError("history lacks phi_00 samples at every step")
    rate = (lam[2:] - lam[:-2]) / (2 * dt)
    return float(np.abs(rate + phi[1:-1]).max())
