"""Galilei group elements (R, v, a, b) in d = 1, 2, 3 and their action on events."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

ORTHO_TOL = 1e-12
Subgroup = Literal["full", "boosts_translations", "rotations", "time"]
SUBGROUPS = ("full", "boosts_translations", "rotations", "time")


@dataclass(frozen=True, eq=False)
class GalileiElement:
    """Rotation ``R``, boost ``v``, spatial translation ``a``, time shift ``b``."""

    R: np.ndarray
    v: np.ndarray
    a: np.ndarray
    b: float

    def __post_init__(self):
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        d = R.shape[0]
        if R.shape != (d, d) or v.shape != (d,) or a.shape != (d,) or d not in (1, 2, 3):
            raise ValueError(f"inconsistent shapes R{R.shape} v{v.shape} a{a.shape}")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(v))
                and np.all(np.isfinite(a)) and np.isfinite(self.b)):
            raise ValueError("non-finite Galilei parameters")
        if np.abs(R.T @ R - np.eye(d)).max() > ORTHO_TOL * 10 or abs(np.linalg.det(R) - 1.0) > ORTHO_TOL * 10:
            raise ValueError("R is not a proper rotation")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.R.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "GalileiElement":
        return cls(np.eye(dim), np.zeros(dim), np.zeros(dim), 0.0)

    @classmethod
    def boost(cls, v) -> "GalileiElement":
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return cls(np.eye(v.size), v, np.zeros(v.size), 0.0)

    @classmethod
    def translation(cls, a) -> "GalileiElement":
        a = np.atleast_1d(np.asarray(a, dtype=float))
        return cls(np.eye(a.size), np.zeros(a.size), a, 0.0)

    @classmethod
    def time_shift(cls, b: float, dim: int = 1) -> "GalileiElement":
        return cls(np.eye(dim), np.zeros(dim), np.zeros(dim), b)

    def params(self) -> np.ndarray:
        """Flat parameter vector (R row-major, v, a, b)."""
        return np.concatenate([self.R.ravel(), self.v, self.a, [self.b]])

    def to_record(self) -> dict:
        return {"dim": self.dim, "R": self.R.ravel().tolist(), "v": self.v.tolist(),
                "a": self.a.tolist(), "b": self.b}

    @classmethod
    def from_record(cls, rec: dict) -> "GalileiElement":
        d = int(rec["dim"])
        return cls(np.asarray(rec["R"], dtype=float).reshape(d, d), rec["v"], rec["a"], rec["b"])

    def __repr__(self) -> str:
        return (f"GalileiElement(R={self.R.tolist()}, v={self.v.tolist()}, "
                f"a={self.a.tolist()}, b={self.b})")


@dataclass(frozen=True)
class Event:
    """Particle positions ``x`` with shape (n, d) at time ``t``."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if not np.all(np.isfinite(x)) or not np.isfinite(self.t):
            raise ValueError("non-finite event")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))


def _check_dim(*gs: GalileiElement) -> None:
    if len({g.dim for g in gs}) != 1:
        raise ValueError("Galilei elements of different spatial dimension")


def compose(g1: GalileiElement, g2: GalileiElement) -> GalileiElement:
    _check_dim(g1, g2)
    return GalileiElement(
        g1.R @ g2.R,
        g1.v + g1.R @ g2.v,
        g1.a + g1.R @ g2.a + g1.v * g2.b,
        g1.b + g2.b,
    )


def inverse(g: GalileiElement) -> GalileiElement:
    Rinv = g.R.T
    return GalileiElement(Rinv, -Rinv @ g.v, -Rinv @ (g.a - g.v * g.b), -g.b)


def act_on_event(g: GalileiElement, e: Event) -> Event:
    if e.x.shape[1] != g.dim:
        raise ValueError("event and group element differ in dimension")
    x = e.x @ g.R.T + g.v * e.t + g.a
    return Event(x, e.t + g.b)


def distance(g1: GalileiElement, g2: GalileiElement) -> float:
    """Max componentwise difference of the parameters."""
    _check_dim(g1, g2)
    return float(np.abs(g1.params() - g2.params()).max())


def commute(g1: GalileiElement, g2: GalileiElement, tol: float = 1e-12) -> bool:
    return distance(compose(g1, g2), compose(g2, g1)) <= tol


def random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    if dim == 1:
        return np.eye(1)
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    # re-orthonormalize so the invariant holds to rounding
    u, _, vt = np.linalg.svd(q)
    return u @ vt


def sample(seed, subgroup: Subgroup = "full", dim: int = 3) -> GalileiElement:
    """Draw an element of the named subgroup.

    ``seed`` is an int or a ``numpy.random.Generator``.  Boost and translation
    components are uniform in [-2, 2], time shifts uniform in [-1, 1].
    """
    if subgroup not in SUBGROUPS:
        raise ValueError(f"unknown subgroup {subgroup!r}")
    rng = np.random.default_rng(seed)
    zero = np.zeros(dim)
    if subgroup == "boosts_translations":
        return GalileiElement(np.eye(dim), rng.uniform(-2, 2, dim), rng.uniform(-2, 2, dim), 0.0)
    if subgroup == "rotations":
        return GalileiElement(random_rotation(rng, dim), zero, zero, 0.0)
    if subgroup == "time":
        return GalileiElement(np.eye(dim), zero, zero, rng.uniform(-1, 1))
    R = random_rotation(rng, dim)
    return GalileiElement(R, rng.uniform(-2, 2, dim), rng.uniform(-2, 2, dim), rng.uniform(-1, 1))
