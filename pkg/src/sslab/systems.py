"""Particle systems with Galilei-invariant pair potentials.

A potential depends on positions only through the mutual distances r_ij and
may also depend on the masses (the gravitational-like pair does).  Position
arrays have shape ``(..., n, d)``; leading axes broadcast, which is how the
quantum grid evaluates V on every grid point at once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class PairPotential:
    """Sum over pairs i < j of f(r_ij, m_i, m_j)."""

    name = "pair"
    mass_dependent = False

    def pair(self, r, mi, mj):
        raise NotImplementedError

    def dpair_dr(self, r, mi, mj):
        raise NotImplementedError

    def dpair_dmi(self, r, mi, mj):
        return np.zeros_like(r)

    def value(self, x: np.ndarray, m: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = x.shape[-2]
        total = np.zeros(x.shape[:-2])
        for i in range(n):
            for j in range(i + 1, n):
                r = np.linalg.norm(x[..., i, :] - x[..., j, :], axis=-1)
                total = total + self.pair(r, m[i], m[j])
        return total

    def grad_x(self, x: np.ndarray, m: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        n = x.shape[-2]
        g = np.zeros_like(x)
        for i in range(n):
            for j in range(i + 1, n):
                diff = x[..., i, :] - x[..., j, :]
                r = np.linalg.norm(diff, axis=-1)
                coef = (self.dpair_dr(r, m[i], m[j]) / r)[..., None]
                g[..., i, :] += coef * diff
                g[..., j, :] -= coef * diff
        return g

    def grad_m(self, x: np.ndarray, m: np.ndarray) -> np.ndarray:
        """Partial derivatives with respect to each mass at fixed positions."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-2]
        g = np.zeros(x.shape[:-2] + (n,))
        if not self.mass_dependent:
            return g
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                r = np.linalg.norm(x[..., i, :] - x[..., j, :], axis=-1)
                g[..., i] += self.dpair_dmi(r, m[i], m[j])
        return g

    def to_record(self) -> dict:
        return {"name": self.name}


class ZeroPotential(PairPotential):
    name = "zero"

    def pair(self, r, mi, mj):
        return np.zeros_like(r)

    def dpair_dr(self, r, mi, mj):
        return np.zeros_like(r)

    def value(self, x, m):
        return np.zeros(np.asarray(x).shape[:-2])

    def grad_x(self, x, m):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass
class HarmonicPair(PairPotential):
    """k r^2 / 2 for every pair."""

    k: float = 1.0
    name = "harmonic"

    def pair(self, r, mi, mj):
        return 0.5 * self.k * r ** 2

    def dpair_dr(self, r, mi, mj):
        return self.k * r

    def grad_x(self, x, m):
        # closed form avoids the r -> 0 division in the generic path
        x = np.asarray(x, dtype=float)
        n = x.shape[-2]
        total = x.sum(axis=-2, keepdims=True)
        return self.k * (n * x - total)

    def to_record(self):
        return {"name": self.name, "k": self.k}


@dataclass
class GravitationalPair(PairPotential):
    """-G m_i m_j / r_ij; the only shipped potential that depends on masses."""

    G: float = 1.0
    name = "gravitational"
    mass_dependent = True

    def pair(self, r, mi, mj):
        return -self.G * mi * mj / r

    def dpair_dr(self, r, mi, mj):
        return self.G * mi * mj / r ** 2

    def dpair_dmi(self, r, mi, mj):
        return -self.G * mj / r

    def to_record(self):
        return {"name": self.name, "G": self.G}


POTENTIALS = {"zero": ZeroPotential, "harmonic": HarmonicPair, "gravitational": GravitationalPair}


def make_potential(name: str, **params) -> PairPotential:
    try:
        return POTENTIALS[name](**params)
    except KeyError:
        raise ValueError(f"unknown potential {name!r}") from None


@dataclass
class SystemSpec:
    """n particles in d dimensions with masses, hbar and a pair potential."""

    masses: np.ndarray
    dim: int = 1
    hbar: float = 1.0
    potential: PairPotential = field(default_factory=ZeroPotential)

    def __post_init__(self):
        self.masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if np.any(self.masses <= 0):
            raise ValueError("masses must be positive")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")

    @property
    def n(self) -> int:
        return self.masses.size

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def center_of_mass(self, x: np.ndarray) -> np.ndarray:
        """Mass-weighted mean over the particle axis of ``(..., n, d)``."""
        return np.einsum("i,...id->...d", self.masses, x) / self.total_mass

    def with_total_mass(self, M: float) -> "SystemSpec":
        """Same system with masses rescaled so they sum to M."""
        return SystemSpec(self.masses * (M / self.total_mass), self.dim, self.hbar, self.potential)

    def energy(self, x: np.ndarray, p: np.ndarray) -> float:
        kinetic = 0.5 * np.sum(np.sum(p ** 2, axis=-1) / self.masses)
        return float(kinetic + self.potential.value(x, self.masses))


def invariance_defect(spec: SystemSpec, seed=0, trials: int = 20) -> float:
    """Largest change of V under random rigid motions of random configurations."""
    from .galilei import random_rotation

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-2, 2, (spec.n, spec.dim))
        R = random_rotation(rng, spec.dim)
        y = x @ R.T + rng.uniform(-2, 2, spec.dim)
        v0 = spec.potential.value(x, spec.masses)
        worst = max(worst, float(abs(spec.potential.value(y, spec.masses) - v0)))
    return worst
