"""Multiplier exponents on the Galilei group.

Exponents are real valued and compared with strict equality (no reduction
mod 2 pi), so the cocycle identity is exact and the relevant extension is by
the reals.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Literal

import numpy as np

from .galilei import GalileiElement, commute, compose, inverse, sample

Evaluator = Callable[[GalileiElement, GalileiElement], float]
NORMALIZATION_TOL = 1e-12
WITNESS_TOL = 1e-8


class NonCommutingPairWarning(UserWarning):
    """Antisymmetric part requested for a pair that does not commute."""


@dataclass(frozen=True)
class MultiplierExponent:
    """Real function xi(g1, g2) on pairs of group elements.

    ``mass`` and ``hbar`` are only meaningful for the Bargmann family.
    """

    evaluator: Evaluator
    tag: Literal["bargmann", "zero", "custom", "corrupted"] = "custom"
    mass: float | None = None
    hbar: float | None = None

    def __call__(self, g1: GalileiElement, g2: GalileiElement) -> float:
        return float(self.evaluator(g1, g2))

    def normalization_residual(self, dim: int, seed=0, samples: int = 100) -> float:
        rng = np.random.default_rng(seed)
        e = GalileiElement.identity(dim)
        worst = 0.0
        for _ in range(samples):
            g = sample(rng, "full", dim)
            worst = max(worst, abs(self(e, g)), abs(self(g, e)))
        return worst


@dataclass(frozen=True)
class Coboundary:
    """Phase redefinition gamma(g) with gamma(identity) = 0."""

    evaluator: Callable[[GalileiElement], float]

    def __call__(self, g: GalileiElement) -> float:
        return float(self.evaluator(g))

    def check(self, dim: int) -> None:
        value = self(GalileiElement.identity(dim))
        if abs(value) > NORMALIZATION_TOL:
            raise ValueError(f"coboundary gamma(1) = {value} != 0")


@dataclass(frozen=True)
class CentralExtensionElement:
    theta: float
    g: GalileiElement


@dataclass(frozen=True)
class Witness:
    g1: GalileiElement
    g2: GalileiElement
    xi_12: float
    xi_21: float
    gap: float

    def to_record(self) -> dict:
        return {"g1": self.g1.to_record(), "g2": self.g2.to_record(),
                "xi_12": self.xi_12, "xi_21": self.xi_21, "gap": self.gap}


@dataclass(frozen=True)
class ObstructionReport:
    obstructed: bool
    witness: Witness | None
    antisym_first: float | None = None
    antisym_second: float | None = None


def bargmann_exponent(M: float, hbar: float, g1: GalileiElement, g2: GalileiElement) -> float:
    """(M/hbar) (v1 . R1 a2 + v1^2 b2 / 2)."""
    if M <= 0 or hbar <= 0:
        raise ValueError("mass and hbar must be positive")
    if g1.dim != g2.dim:
        raise ValueError("Galilei elements of different spatial dimension")
    return (M / hbar) * (g1.v @ (g1.R @ g2.a) + 0.5 * (g1.v @ g1.v) * g2.b)


def bargmann(M: float = 1.0, hbar: float = 1.0) -> MultiplierExponent:
    if M <= 0 or hbar <= 0:
        raise ValueError("mass and hbar must be positive")
    return MultiplierExponent(lambda g1, g2: bargmann_exponent(M, hbar, g1, g2),
                              "bargmann", M, hbar)


def zero_exponent() -> MultiplierExponent:
    return MultiplierExponent(lambda g1, g2: 0.0, "zero")


def corrupted(M: float = 1.0, hbar: float = 1.0) -> MultiplierExponent:
    """Bargmann exponent with the v1^2 b2 / 2 term dropped; not a cocycle."""
    return MultiplierExponent(lambda g1, g2: (M / hbar) * (g1.v @ (g1.R @ g2.a)),
                              "corrupted", M, hbar)


def custom(evaluator: Evaluator, dim: int, seed=0) -> MultiplierExponent:
    """Wrap a callback, refusing it unless xi(1, g) = xi(g, 1) = 0."""
    xi = MultiplierExponent(evaluator, "custom")
    residual = xi.normalization_residual(dim, seed)
    if residual > NORMALIZATION_TOL:
        raise ValueError(f"custom exponent violates normalization (residual {residual:.3g})")
    return xi


def cocycle_residual(xi: MultiplierExponent, g1, g2, g3) -> float:
    return (xi(g1, g2) - xi(g1, compose(g2, g3))
            + xi(compose(g1, g2), g3) - xi(g2, g3))


def check_cocycle(xi: MultiplierExponent, samples: Iterable[tuple]) -> float:
    """Largest |cocycle identity defect| over the sampled triples."""
    return max((abs(cocycle_residual(xi, *t)) for t in samples), default=0.0)


def random_triples(seed, count: int, dim: int = 3, subgroup="full") -> list[tuple]:
    rng = np.random.default_rng(seed)
    return [tuple(sample(rng, subgroup, dim) for _ in range(3)) for _ in range(count)]


def apply_coboundary(xi: MultiplierExponent, gamma: Coboundary) -> MultiplierExponent:
    """xi'(g1, g2) = xi(g1, g2) + gamma(g1) - gamma(g1 g2) + gamma(g2)."""

    def shifted(g1, g2):
        return xi(g1, g2) + gamma(g1) - gamma(compose(g1, g2)) + gamma(g2)

    return MultiplierExponent(shifted, "custom", xi.mass, xi.hbar)


def antisymmetric_part(xi: MultiplierExponent, g1: GalileiElement, g2: GalileiElement) -> float:
    """xi(g1, g2) - xi(g2, g1); only coboundary-invariant for commuting pairs."""
    if not commute(g1, g2, tol=1e-10):
        warnings.warn("pair does not commute; antisymmetric part is not an invariant",
                      NonCommutingPairWarning, stacklevel=2)
    return xi(g1, g2) - xi(g2, g1)


def commuting_pairs(seed, count: int, dim: int = 3):
    """Pairs drawn from the abelian boost/translation subgroup."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield sample(rng, "boosts_translations", dim), sample(rng, "boosts_translations", dim)


def nontriviality_witness(xi: MultiplierExponent, seed=0, dim: int = 3,
                          samples: int = 10_000, tol: float = WITNESS_TOL) -> Witness | None:
    """Commuting pair on which xi is not symmetric, or None if none was found.

    A witness proves xi is not a coboundary.  ``None`` is inconclusive.
    """
    for g1, g2 in commuting_pairs(seed, samples, dim):
        x12, x21 = xi(g1, g2), xi(g2, g1)
        if abs(x12 - x21) > tol:
            return Witness(g1, g2, x12, x21, x12 - x21)
    return None


def direct_sum_obstruction(xi1: MultiplierExponent, xi2: MultiplierExponent, seed=0,
                           dim: int = 3, samples: int = 10_000, pairs=None,
                           tol: float = WITNESS_TOL) -> ObstructionReport:
    """Look for a commuting pair on which the antisymmetric parts differ.

    Such a pair shows the exponents are inequivalent, so no ray
    representation on the direct sum restricts to both.  Failure to find one
    is reported as not obstructed, which is inconclusive.
    """
    candidates = pairs if pairs is not None else commuting_pairs(seed, samples, dim)
    for g1, g2 in candidates:
        a1 = xi1(g1, g2) - xi1(g2, g1)
        a2 = xi2(g1, g2) - xi2(g2, g1)
        if abs(a1 - a2) > tol:
            diff = MultiplierExponent(lambda h1, h2: xi2(h1, h2) - xi1(h1, h2))
            w = Witness(g1, g2, diff(g1, g2), diff(g2, g1), abs(a2 - a1))
            return ObstructionReport(True, w, a1, a2)
    return ObstructionReport(False, None)


def extension_compose(e1: CentralExtensionElement, e2: CentralExtensionElement,
                      xi: MultiplierExponent) -> CentralExtensionElement:
    return CentralExtensionElement(e1.theta + e2.theta + xi(e1.g, e2.g), compose(e1.g, e2.g))


def extension_inverse(e: CentralExtensionElement, xi: MultiplierExponent) -> CentralExtensionElement:
    ginv = inverse(e.g)
    return CentralExtensionElement(-e.theta - xi(e.g, ginv), ginv)


def extension_identity(dim: int) -> CentralExtensionElement:
    return CentralExtensionElement(0.0, GalileiElement.identity(dim))


def extension_distance(e1: CentralExtensionElement, e2: CentralExtensionElement) -> float:
    return max(abs(e1.theta - e2.theta),
               float(np.abs(e1.g.params() - e2.g.params()).max()))


def extension_associativity_residual(xi: MultiplierExponent, triples) -> float:
    """Largest theta mismatch between (e1 e2) e3 and e1 (e2 e3)."""
    worst = 0.0
    for g1, g2, g3 in triples:
        e1, e2, e3 = (CentralExtensionElement(0.0, g) for g in (g1, g2, g3))
        left = extension_compose(extension_compose(e1, e2, xi), e3, xi)
        right = extension_compose(e1, extension_compose(e2, e3, xi), xi)
        worst = max(worst, abs(left.theta - right.theta))
    return worst
