"""Finite-dimensional operator algebras: commutants, centers and sectors.

Operators are plain complex ``(n, n)`` numpy arrays.  Subspaces of the
matrix space are stored as orthonormal bases under the trace inner product
``<A, B> = tr(A^dagger B)``, which for row-major flattening is the ordinary
Euclidean product on ``C^(n*n)``.

Algebras are always handled through generating sets.  Commutants are taken of
the self-adjoint closure of the generators (each generator together with its
adjoint), so every commutant computed here is a von Neumann algebra and the
double commutant of a generating set is the von Neumann algebra it generates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_DIM = 64
RANK_RTOL = 1e-10
MEMBERSHIP_TOL = 1e-9
GAP_TOL = 1e-6
MAX_RESAMPLES = 8


class DimensionError(ValueError):
    """Operators of inconsistent or unsupported size."""


@dataclass(frozen=True)
class OperatorSubspace:
    """Subspace of n x n matrices with a trace-orthonormal basis.

    ``basis`` has shape ``(k, n, n)``.  ``flags`` carries notes such as
    ``"empty-generators"``.
    """

    dim_hilbert: int
    basis: np.ndarray
    flags: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def vectors(self) -> np.ndarray:
        """Basis as columns of an ``(n*n, k)`` matrix."""
        return self.basis.reshape(self.dim, -1).T

    def project(self, X: np.ndarray) -> np.ndarray:
        Q = self.vectors()
        x = np.asarray(X, dtype=complex).ravel()
        return (Q @ (Q.conj().T @ x)).reshape(X.shape)

    def residual(self, X: np.ndarray) -> float:
        """Frobenius distance from X to the subspace."""
        return float(np.linalg.norm(X - self.project(X)))

    def contains(self, X: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
        scale = max(1.0, float(np.linalg.norm(X)))
        return self.residual(X) < tol * scale

    def is_subspace_of(self, other: "OperatorSubspace", tol: float = MEMBERSHIP_TOL) -> bool:
        return all(other.contains(B, tol) for B in self.basis)

    def same_as(self, other: "OperatorSubspace", tol: float = MEMBERSHIP_TOL) -> bool:
        return (self.dim == other.dim and self.is_subspace_of(other, tol)
                and other.is_subspace_of(self, tol))

    def gram_error(self) -> float:
        Q = self.vectors()
        return float(np.abs(Q.conj().T @ Q - np.eye(self.dim)).max(initial=0.0))


@dataclass(frozen=True)
class SectorDecomposition:
    """Minimal central projections of an algebra and their ranks."""

    projectors: list[np.ndarray]
    multiplicities: list[int]
    flags: tuple[str, ...] = ()

    @property
    def count(self) -> int:
        return len(self.projectors)


@dataclass(frozen=True)
class DiracJauchReport:
    holds: bool
    commutant_dim: int
    center_dim: int
    residual: float
    commutant_abelian: bool = field(default=False)


def as_operators(generators: Iterable[np.ndarray], dim: int | None = None) -> list[np.ndarray]:
    """Validate a generator list and return complex square arrays."""
    ops = [np.asarray(A, dtype=complex) for A in generators]
    sizes = {A.shape for A in ops}
    if not ops:
        if dim is None:
            raise DimensionError("empty generator list needs an explicit dim")
        sizes = {(dim, dim)}
    if len(sizes) != 1:
        raise DimensionError(f"generators of mixed shapes {sorted(sizes)}")
    (shape,) = sizes
    if len(shape) != 2 or shape[0] != shape[1] or shape[0] < 1:
        raise DimensionError(f"generators must be square, got {shape}")
    if dim is not None and shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {shape[0]}")
    if shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {shape[0]} exceeds cap {MAX_DIM}")
    for A in ops:
        if not np.all(np.isfinite(A)):
            raise ValueError("generator with non-finite entries")
    return ops


def self_adjoint_closure(ops: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = list(ops)
    for A in ops:
        if not np.allclose(A, A.conj().T, atol=1e-14):
            out.append(A.conj().T)
    return out


def commutator_map(A: np.ndarray) -> np.ndarray:
    """Matrix of B -> AB - BA acting on row-major vec(B)."""
    n = A.shape[0]
    eye = np.eye(n)
    return np.kron(A, eye) - np.kron(eye, A.T)


def _null_space(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    ref = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * max(ref, 1.0)))
    return vh[rank:].conj().T


def _orthonormalize(vectors: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the column span."""
    if vectors.shape[1] == 0:
        return vectors
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.sum(s > rtol * max(s[0], 1.0)))
    return u[:, :rank]


def _subspace(n: int, Q: np.ndarray, flags=()) -> OperatorSubspace:
    basis = Q.T.reshape(Q.shape[1], n, n).copy()
    return OperatorSubspace(n, basis, tuple(flags))


def commutant(generators, *, dim: int | None = None,
              adjoint_closed: bool = True) -> OperatorSubspace:
    """Orthonormal basis of {B : AB = BA for every generator A}.

    The nullspace of the stacked maps ``B -> A_k B - B A_k`` is found one
    generator at a time, restricting the running nullspace at each stage.
    Generators are rescaled to unit norm so the rank cutoff is uniform.
    With ``adjoint_closed`` (default) the adjoints of the generators are
    included, which is what makes the result a von Neumann algebra.
    """
    ops = as_operators(generators, dim)
    n = ops[0].shape[0] if ops else dim
    flags = [] if ops else ["empty-generators"]
    if adjoint_closed:
        ops = self_adjoint_closure(ops)
    N = np.eye(n * n, dtype=complex)
    for A in ops:
        norm = np.linalg.norm(A)
        if norm == 0.0:
            continue
        L = commutator_map(A / norm)
        N = N @ _null_space(L @ N)
        N = _orthonormalize(N)
        if N.shape[1] == 0:
            break
    return _subspace(n, N, flags)


def bicommutant(generators, *, dim: int | None = None) -> OperatorSubspace:
    """von Neumann algebra generated by the generators (double commutant)."""
    first = commutant(generators, dim=dim)
    return commutant(list(first.basis), dim=first.dim_hilbert)


def intersect(S: OperatorSubspace, T: OperatorSubspace) -> OperatorSubspace:
    """Intersection of two operator subspaces."""
    if S.dim_hilbert != T.dim_hilbert:
        raise DimensionError("subspaces act on different Hilbert spaces")
    QS, QT = S.vectors(), T.vectors()
    if QS.shape[1] == 0 or QT.shape[1] == 0:
        return _subspace(S.dim_hilbert, QS[:, :0])
    off = QS - QT @ (QT.conj().T @ QS)
    coeff = _null_space(off)
    return _subspace(S.dim_hilbert, _orthonormalize(QS @ coeff))


def center(generators, *, dim: int | None = None) -> OperatorSubspace:
    """Center O intersect O' of the algebra O generated by the generators."""
    ops = as_operators(generators, dim)
    n = ops[0].shape[0] if ops else dim
    prime = commutant(ops, dim=n)
    return commutant(ops + list(prime.basis), dim=n)


def generated_algebra(generators, *, dim: int | None = None,
                      max_iter: int | None = None) -> OperatorSubspace:
    """Unital *-algebra spanned by words in the generators and their adjoints.

    Built by repeatedly multiplying the current span on the left by every
    generator until the dimension stops growing (at most ``n**2`` rounds).
    In finite dimensions this equals the double commutant.
    """
    ops = self_adjoint_closure(as_operators(generators, dim))
    n = ops[0].shape[0] if ops else dim
    cap = max_iter if max_iter is not None else n * n
    start = [np.eye(n, dtype=complex).ravel()] + [A.ravel() for A in ops]
    Q = _orthonormalize(np.stack(start, axis=1))
    for _ in range(cap):
        basis = Q.T.reshape(-1, n, n)
        grown = [A @ B for A in ops for B in basis]
        if not grown:
            break
        Q_new = _orthonormalize(np.concatenate([Q, np.stack([X.ravel() for X in grown], axis=1)], axis=1))
        if Q_new.shape[1] == Q.shape[1]:
            break
        Q = Q_new
    return _subspace(n, Q)


def is_abelian(S: OperatorSubspace, tol: float = MEMBERSHIP_TOL) -> bool:
    B = S.basis
    for i in range(S.dim):
        for j in range(i + 1, S.dim):
            if np.linalg.norm(B[i] @ B[j] - B[j] @ B[i]) > tol:
                return False
    return True


def is_closed_algebra(S: OperatorSubspace, tol: float = MEMBERSHIP_TOL) -> bool:
    """Span contains the identity and is closed under product and adjoint."""
    n = S.dim_hilbert
    if not S.contains(np.eye(n), tol):
        return False
    for A in S.basis:
        if not S.contains(A.conj().T, tol):
            return False
        for B in S.basis:
            if not S.contains(A @ B, tol):
                return False
    return True


def dirac_jauch_check(generators, *, dim: int | None = None) -> DiracJauchReport:
    """Test O' contained in O by projecting the commutant basis onto O."""
    ops = as_operators(generators, dim)
    n = ops[0].shape[0] if ops else dim
    prime = commutant(ops, dim=n)
    algebra = commutant(list(prime.basis), dim=n)
    residual = max((algebra.residual(B) for B in prime.basis), default=0.0)
    z = intersect(algebra, prime)
    return DiracJauchReport(
        holds=residual < MEMBERSHIP_TOL,
        commutant_dim=prime.dim,
        center_dim=z.dim,
        residual=residual,
        commutant_abelian=is_abelian(prime),
    )


def is_maximal_abelian(generators, *, dim: int | None = None) -> bool:
    """Whether the generated algebra A satisfies A = A' (maximal in B(H))."""
    ops = as_operators(generators, dim)
    n = ops[0].shape[0] if ops else dim
    prime = commutant(ops, dim=n)
    return bicommutant(ops, dim=n).same_as(prime)


def _hermitian_parts(S: OperatorSubspace) -> list[np.ndarray]:
    parts = []
    for Z in S.basis:
        parts.append(0.5 * (Z + Z.conj().T))
        parts.append(-0.5j * (Z - Z.conj().T))
    return parts


def _cluster(evals: np.ndarray, gap: float) -> list[np.ndarray]:
    groups, current = [], [0]
    for i in range(1, len(evals)):
        if evals[i] - evals[i - 1] > gap:
            groups.append(np.array(current))
            current = []
        current.append(i)
    groups.append(np.array(current))
    return groups


def sector_decomposition(generators, *, dim: int | None = None, seed: int = 0,
                         gap_tol: float = GAP_TOL) -> SectorDecomposition:
    """Split the Hilbert space into the sectors reduced by the algebra.

    A random self-adjoint element of the center is diagonalized; its
    eigenspaces, grouped by eigenvalue, are the ranges of the minimal central
    projections.  A draw is accepted only when it separates exactly
    ``dim(center)`` eigenvalue clusters with gaps above ``gap_tol``.
    """
    ops = as_operators(generators, dim)
    n = ops[0].shape[0] if ops else dim
    z = center(ops, dim=n)
    if z.dim <= 1:
        return SectorDecomposition([np.eye(n, dtype=complex)], [n],
                                   ("no superselection rules",))
    parts = _hermitian_parts(z)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLES + 1):
        c = rng.standard_normal(len(parts))
        X = sum(ci * P for ci, P in zip(c, parts))
        X = 0.5 * (X + X.conj().T)
        scale = max(1.0, float(np.abs(X).max()))
        evals, evecs = np.linalg.eigh(X)
        groups = _cluster(evals / scale, gap_tol)
        if len(groups) == z.dim:
            break
    else:
        raise RuntimeError("could not separate central eigenvalues after resampling")
    projectors = []
    for g in groups:
        V = evecs[:, g]
        P = V @ V.conj().T
        projectors.append(0.5 * (P + P.conj().T))
    order = sorted(range(len(projectors)),
                   key=lambda k: (len(groups[k]),
                                  tuple(-np.round(projectors[k].diagonal().real, 9))))
    return SectorDecomposition([projectors[k] for k in order],
                               [len(groups[k]) for k in order])


def matrix_units(n: int) -> list[np.ndarray]:
    """Standard basis E_ij of the full n x n matrix algebra."""
    units = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j] = 1.0
            units.append(E)
    return units


def block_algebra_generators(sizes: Sequence[int]) -> list[np.ndarray]:
    """Matrix units of each diagonal block of M_{k1} + M_{k2} + ..."""
    n = int(sum(sizes))
    gens, offset = [], 0
    for k in sizes:
        for E in matrix_units(k):
            G = np.zeros((n, n), dtype=complex)
            G[offset:offset + k, offset:offset + k] = E
            gens.append(G)
        offset += k
    return gens
