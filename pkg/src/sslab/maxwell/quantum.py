"""Quantized lambda_00 channel and the charge operator.

States are functions of lambda_00 on a periodic grid, optionally tensored
with a k-dimensional internal factor.  The charge acts as
Q = -i sqrt(4 pi) d/dlambda_00, implemented spectrally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import vnalg

SQRT4PI = float(np.sqrt(4 * np.pi))


@dataclass(frozen=True)
class LambdaGrid:
    N: int
    L: float

    def __post_init__(self):
        if self.N < 2 or self.L <= 0:
            raise ValueError("need N >= 2 and L > 0")

    @property
    def dlam(self) -> float:
        return self.L / self.N

    @property
    def lam(self) -> np.ndarray:
        """Points centred on zero."""
        return (np.arange(self.N) - self.N // 2) * self.dlam

    @property
    def kappa(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dlam)


@dataclass(frozen=True)
class BoundaryWaveFunction:
    """Amplitudes of shape (N,) or (N, k) on ``grid``."""

    grid: LambdaGrid
    psi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=complex)
        if psi.shape[0] != self.grid.N or psi.ndim > 2:
            raise ValueError("amplitudes must have shape (N,) or (N, k)")
        object.__setattr__(self, "psi", psi)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2) * self.grid.dlam))

    def normalized(self) -> "BoundaryWaveFunction":
        n = self.norm
        if n == 0:
            raise ValueError("zero state")
        return BoundaryWaveFunction(self.grid, self.psi / n)

    def check_unit(self, tol: float = 1e-10) -> None:
        if abs(self.norm - 1.0) > tol:
            raise ValueError(f"state norm {self.norm} is not 1")


def plane_wave(grid: LambdaGrid, k: float) -> BoundaryWaveFunction:
    return BoundaryWaveFunction(grid, np.exp(1j * k * grid.lam)).normalized()


def random_localized(grid: LambdaGrid, seed=0, width: float | None = None,
                     band: int | None = None) -> BoundaryWaveFunction:
    """Band-limited random amplitudes under a Gaussian envelope.

    The envelope keeps the state far from the periodic seam, where the
    multiplication operator lambda is discontinuous.
    """
    rng = np.random.default_rng(seed)
    band = band if band is not None else grid.N // 16
    coef = np.zeros(grid.N, dtype=complex)
    idx = np.r_[0:band + 1, grid.N - band:grid.N]
    coef[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    smooth = np.fft.ifft(coef)
    width = width if width is not None else grid.L / 16
    envelope = np.exp(-grid.lam ** 2 / (2 * width ** 2))
    return BoundaryWaveFunction(grid, smooth * envelope).normalized()


def apply_charge_operator(state: BoundaryWaveFunction, check_norm: bool = True) -> BoundaryWaveFunction:
    """Q psi = -i sqrt(4 pi) d psi / d lambda_00 (spectral, along axis 0)."""
    if check_norm:
        state.check_unit()
    kappa = state.grid.kappa.reshape((-1,) + (1,) * (state.psi.ndim - 1))
    deriv = np.fft.ifft(1j * kappa * np.fft.fft(state.psi, axis=0), axis=0)
    return BoundaryWaveFunction(state.grid, -1j * SQRT4PI * deriv)


def apply_lambda(state: BoundaryWaveFunction) -> BoundaryWaveFunction:
    lam = state.grid.lam.reshape((-1,) + (1,) * (state.psi.ndim - 1))
    return BoundaryWaveFunction(state.grid, lam * state.psi)


def commutator_residual(state: BoundaryWaveFunction) -> float:
    """||[Q, lambda] psi + i sqrt(4 pi) psi|| / ||psi||."""
    Qlam = apply_charge_operator(apply_lambda(state), check_norm=False).psi
    lamQ = apply_lambda(apply_charge_operator(state, check_norm=False)).psi
    gap = Qlam - lamQ + 1j * SQRT4PI * state.psi
    return float(np.linalg.norm(gap) / np.linalg.norm(state.psi))


def eigenvalue_residual(grid: LambdaGrid, k: float) -> float:
    """max |Q e^{ik lambda} - sqrt(4 pi) k e^{ik lambda}|."""
    pw = plane_wave(grid, k)
    return float(np.abs(apply_charge_operator(pw).psi - SQRT4PI * k * pw.psi).max())


# -- finite-dimensional algebra demonstration -------------------------------

def charge_matrix(N: int, L: float) -> np.ndarray:
    """Dense Q on C^N: sqrt(4 pi) F^-1 diag(kappa) F."""
    grid = LambdaGrid(N, L)
    F = np.fft.fft(np.eye(N), axis=0)
    return SQRT4PI * np.linalg.solve(F, grid.kappa[:, None] * F)


def shift_matrix(N: int) -> np.ndarray:
    """Cyclic shift by one grid point, a function of Q."""
    return np.roll(np.eye(N), 1, axis=0)


@dataclass(frozen=True)
class CenterDemoReport:
    restricted: vnalg.SectorDecomposition
    unrestricted: vnalg.SectorDecomposition
    charge_center_residual: float
    restricted_center_dim: int
    unrestricted_center_dim: int

    def to_record(self) -> dict:
        return {"restricted_sectors": self.restricted.count,
                "restricted_multiplicities": list(self.restricted.multiplicities),
                "unrestricted_sectors": self.unrestricted.count,
                "charge_center_residual": self.charge_center_residual,
                "restricted_center_dim": self.restricted_center_dim,
                "unrestricted_center_dim": self.unrestricted_center_dim}


def center_demo(N_lam: int = 4, k: int = 2, L: float | None = None, seed=0) -> CenterDemoReport:
    """Superselection of charge once lambda_00 multiplication is removed.

    The restricted algebra is generated by Q x 1, the shift x 1 and
    1 x (all k x k matrix units); its center is spanned by the spectral
    projectors of Q, one sector per grid momentum.  Adding lambda_00 x 1
    makes the center trivial.
    """
    if N_lam * k > vnalg.MAX_DIM:
        raise vnalg.DimensionError(f"dimension {N_lam * k} exceeds {vnalg.MAX_DIM}")
    L = float(N_lam) if L is None else L
    Q = charge_matrix(N_lam, L)
    Ik, IN = np.eye(k), np.eye(N_lam)
    restricted = [np.kron(Q, Ik), np.kron(shift_matrix(N_lam), Ik)]
    restricted += [np.kron(IN, E) for E in vnalg.matrix_units(k)]
    lam = np.diag(LambdaGrid(N_lam, L).lam)
    full = restricted + [np.kron(lam, Ik)]
    Z = vnalg.center(restricted)
    return CenterDemoReport(
        restricted=vnalg.sector_decomposition(restricted, seed=seed),
        unrestricted=vnalg.sector_decomposition(full, seed=seed),
        charge_center_residual=Z.residual(np.kron(Q, Ik)),
        restricted_center_dim=Z.dim,
        unrestricted_center_dim=vnalg.center(full).dim,
    )
