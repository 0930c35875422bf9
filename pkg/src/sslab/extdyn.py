"""Classical dynamics with the particle masses promoted to momenta.

Each particle carries a coordinate lambda_i conjugate to its mass m_i.  The
Hamiltonian is the ordinary one, so the masses are conserved and lambda_i is
driven by dV/dm_i - p_i^2 / (2 m_i^2).  The central extension of the Galilei
group acts on (x, lambda, t) and is an exact symmetry of these equations.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .cocycle import CentralExtensionElement
from .systems import SystemSpec

ENERGY_STEP_TOL = 1e-6


class StepRejected(RuntimeError):
    """Energy changed by more than the per-step tolerance."""


@dataclass(frozen=True)
class ExtendedState:
    x: np.ndarray
    p: np.ndarray
    lam: np.ndarray
    m: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        p = np.asarray(self.p, dtype=float).reshape(x.shape)
        lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        m = np.atleast_1d(np.asarray(self.m, dtype=float))
        if lam.shape != (x.shape[0],) or m.shape != (x.shape[0],):
            raise ValueError("lambda and mass need one entry per particle")
        if np.any(m <= 0):
            raise ValueError("masses must be positive")
        for name, val in (("x", x), ("p", p), ("lam", lam), ("m", m)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x.ravel(), self.p.ravel(), self.lam, self.m])

    @classmethod
    def unpack(cls, y: np.ndarray, n: int, d: int, t: float = 0.0) -> "ExtendedState":
        nd = n * d
        return cls(y[:nd].reshape(n, d), y[nd:2 * nd].reshape(n, d),
                   y[2 * nd:2 * nd + n], y[2 * nd + n:], t)


@dataclass(frozen=True)
class Trajectory:
    """Uniform samples; ``x`` and ``p`` are (K, n, d), ``lam`` is (K, n)."""

    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    lam: np.ndarray
    m: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> ExtendedState:
        return ExtendedState(self.x[i], self.p[i], self.lam[i], self.m, self.times[i])

    def max_distance(self, other: "Trajectory") -> float:
        """Largest state difference at the sample times both share."""
        common, ia, ib = np.intersect1d(np.round(self.times, 9), np.round(other.times, 9),
                                        return_indices=True)
        if common.size == 0:
            raise ValueError("trajectories share no sample times")
        return float(max(np.abs(self.x[ia] - other.x[ib]).max(),
                         np.abs(self.p[ia] - other.p[ib]).max(),
                         np.abs(self.lam[ia] - other.lam[ib]).max()))


def derivatives(s: ExtendedState, spec: SystemSpec) -> ExtendedState:
    """Tangent vector (xdot, pdot, lamdot, mdot) packed as an ExtendedState-like record.

    The returned ``m`` field holds the mass derivatives, which vanish; it is
    stored through ``_Tangent`` so the positivity check does not apply.
    """
    if np.any(s.m <= 0):
        raise ValueError("masses must be positive")
    V = spec.potential
    xdot = s.p / s.m[:, None]
    pdot = -V.grad_x(s.x, s.m)
    lamdot = V.grad_m(s.x, s.m) - np.sum(s.p ** 2, axis=1) / (2 * s.m ** 2)
    return _Tangent(xdot, pdot, lamdot, np.zeros_like(s.m))


@dataclass(frozen=True)
class _Tangent:
    x: np.ndarray
    p: np.ndarray
    lam: np.ndarray
    m: np.ndarray

    def pack(self) -> np.ndarray:
        return np.concatenate([self.x.ravel(), self.p.ravel(), self.lam, self.m])


def _rhs(y: np.ndarray, n: int, d: int, spec: SystemSpec) -> np.ndarray:
    return derivatives(ExtendedState.unpack(y, n, d), spec).pack()


def energy(s: ExtendedState, spec: SystemSpec) -> float:
    return float(0.5 * np.sum(np.sum(s.p ** 2, axis=1) / s.m) + spec.potential.value(s.x, s.m))


def integrate(s0: ExtendedState, spec: SystemSpec, T: float, dt: float,
              energy_tol: float = ENERGY_STEP_TOL) -> Trajectory:
    """Classical RK4 on (x, p, lambda, m); masses are never modified."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    steps = int(round(T / dt))
    n, d = s0.x.shape
    nd = n * d
    y = s0.pack()
    m = s0.m.copy()
    out = np.empty((steps + 1, y.size))
    out[0] = y
    E_prev = energy(s0, spec)
    for k in range(steps):
        k1 = _rhs(y, n, d, spec)
        k2 = _rhs(y + 0.5 * dt * k1, n, d, spec)
        k3 = _rhs(y + 0.5 * dt * k2, n, d, spec)
        k4 = _rhs(y + dt * k3, n, d, spec)
        y = y + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        y[2 * nd + n:] = m
        E = energy(ExtendedState.unpack(y, n, d), spec)
        if abs(E - E_prev) > energy_tol:
            raise StepRejected(f"energy jump {abs(E - E_prev):.3g} at step {k}")
        E_prev = E
        out[k + 1] = y
    times = s0.t + dt * np.arange(steps + 1)
    return Trajectory(times, out[:, :nd].reshape(-1, n, d), out[:, nd:2 * nd].reshape(-1, n, d),
                      out[:, 2 * nd:2 * nd + n], m)


def _resample(traj: Trajectory, src_times: np.ndarray):
    """States of ``traj`` at ``src_times``; exact when the shift is on-grid."""
    idx = (src_times - traj.times[0]) / traj.dt
    if np.allclose(idx, np.rint(idx), atol=1e-9, rtol=0):
        i = np.rint(idx).astype(int)
        return traj.x[i], traj.p[i], traj.lam[i]
    K = len(traj)
    xs = CubicSpline(traj.times, traj.x.reshape(K, -1))(src_times).reshape((-1,) + traj.x.shape[1:])
    ps = CubicSpline(traj.times, traj.p.reshape(K, -1))(src_times).reshape((-1,) + traj.p.shape[1:])
    ls = CubicSpline(traj.times, traj.lam)(src_times)
    return xs, ps, ls


def apply_extended_group(gbar: CentralExtensionElement, traj: Trajectory, hbar: float = 1.0,
                         M: float | None = None, compensate: bool = True,
                         min_samples: int = 5) -> Trajectory:
    """Image of a trajectory under (theta, R, v, a, b).

    x -> R x + v t + a, p -> R p + m v, t -> t + b, and
    lambda -> lambda - (hbar theta / M + v.R x + v^2 t / 2).  The output is
    sampled on the original grid wherever the preimage time is covered.
    ``compensate=False`` leaves lambda untouched (the bare Galilei map).
    """
    g = gbar.g
    if M is None:
        M = float(traj.m.sum())
    t0, t1 = traj.times[0], traj.times[-1]
    eps = 1e-9 * traj.dt
    keep = (traj.times - g.b >= t0 - eps) & (traj.times - g.b <= t1 + eps)
    if keep.sum() < min_samples:
        raise ValueError("trajectory does not cover the shifted time window")
    new_t = traj.times[keep]
    src_t = np.clip(new_t - g.b, t0, t1)
    xs, ps, ls = _resample(traj, src_t)
    Rx = xs @ g.R.T
    tt = src_t[:, None, None]
    x_new = Rx + g.v * tt + g.a
    p_new = ps @ g.R.T + traj.m[None, :, None] * g.v
    if compensate:
        shift = hbar * gbar.theta / M + Rx @ g.v + 0.5 * (g.v @ g.v) * src_t[:, None]
        lam_new = ls - shift
    else:
        lam_new = ls.copy()
    return Trajectory(new_t, x_new, p_new, lam_new, traj.m.copy())


FD5 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def eom_residual(traj: Trajectory, spec: SystemSpec) -> float:
    """Max |finite-difference derivative - derivatives()| over interior samples.

    Five-point central differences, so a trajectory that solves the equations
    exactly shows an O(dt^4) residual.
    """
    K = len(traj)
    if K < 5:
        raise ValueError("need at least five samples")
    n, d = traj.x.shape[1:]
    Y = np.concatenate([traj.x.reshape(K, -1), traj.p.reshape(K, -1), traj.lam], axis=1)
    fd = sum(c * Y[i:K - 4 + i] for i, c in enumerate(FD5)) / traj.dt
    worst = 0.0
    for row, k in enumerate(range(2, K - 2)):
        tan = derivatives(traj.state(k), spec)
        f = np.concatenate([tan.x.ravel(), tan.p.ravel(), tan.lam])
        worst = max(worst, float(np.abs(fd[row] - f).max()))
    return worst


def verify_symmetry(gbar: CentralExtensionElement, traj: Trajectory, spec: SystemSpec,
                    hbar: float = 1.0, compensate: bool = True) -> float:
    """Equation-of-motion residual of the transformed trajectory."""
    return eom_residual(apply_extended_group(gbar, traj, hbar, compensate=compensate), spec)


@dataclass(frozen=True)
class CanonicalChart:
    """(Lambda, M) plus relative pairs (lambda_i - lambda_1, m_i) for i >= 2."""

    Lambda: float
    M: float
    lam_rel: np.ndarray
    m_rel: np.ndarray


def to_canonical_chart(lam, m) -> CanonicalChart:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    m = np.atleast_1d(np.asarray(m, dtype=float))
    return CanonicalChart(float(lam[0]), float(m.sum()), lam[1:] - lam[0], m[1:].copy())


def from_canonical_chart(c: CanonicalChart) -> tuple[np.ndarray, np.ndarray]:
    lam = np.concatenate([[c.Lambda], c.lam_rel + c.Lambda])
    m = np.concatenate([[c.M - c.m_rel.sum()], c.m_rel])
    return lam, m


def poisson_bracket_fd(f, g, lam, m, h: float = 1e-5) -> float:
    """{f, g} over the (lambda, m) pairs by central differences.

    ``f`` and ``g`` take ``(lam, m)`` arrays and return floats.
    """
    lam = np.asarray(lam, dtype=float)
    m = np.asarray(m, dtype=float)

    def partial(fun, which, i):
        lp, lm_, mp, mm = lam.copy(), lam.copy(), m.copy(), m.copy()
        if which == "lam":
            lp[i] += h
            lm_[i] -= h
            return (fun(lp, m) - fun(lm_, m)) / (2 * h)
        mp[i] += h
        mm[i] -= h
        return (fun(lam, mp) - fun(lam, mm)) / (2 * h)

    return float(sum(partial(f, "lam", i) * partial(g, "m", i)
                     - partial(f, "m", i) * partial(g, "lam", i) for i in range(lam.size)))


def action_cost(traj: Trajectory) -> float:
    """Integral of M dLambda/dt along the trajectory, Lambda = lambda_1."""
    return action_cost_series(traj.times, traj.lam[:, 0], float(traj.m.sum()))


def action_cost_series(times, Lambda, M: float) -> float:
    """Trapezoidal integral of M * dLambda/dt from sampled Lambda."""
    times = np.asarray(times, dtype=float)
    Lambda = np.asarray(Lambda, dtype=float)
    rate = np.gradient(Lambda, times, edge_order=1)
    return float(M * np.trapezoid(rate, times))
