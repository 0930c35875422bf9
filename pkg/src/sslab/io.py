"""File formats: text matrices, binary checkpoints, CSV time series.

Binary layouts are little-endian.  A wavefunction checkpoint is

    b"SSWF" | u32 version | u32 naxes | naxes * (u32 N, f64 L) | payload

with the payload as interleaved (re, im) float64 in C order over the axes.
A field snapshot is b"SSFS" | u32 version | u32 count followed by ``count``
named records (u32 name length, utf-8 name, u32 ndim, ndim * u64 shape,
float64 payload).
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

WF_MAGIC = b"SSWF"
FS_MAGIC = b"SSFS"
VERSION = 1


class FormatError(ValueError):
    """File contents do not match the expected layout."""


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


# -- text matrices ---------------------------------------------------------

def _parse_entry(token: str) -> complex:
    try:
        return complex(token.replace("i", "j"))
    except ValueError:
        raise FormatError(f"bad matrix entry {token!r}") from None


def parse_matrix(text: str) -> np.ndarray:
    """Header line ``n`` then n rows of n entries like ``1.5-2i``."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError("empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise FormatError("first line must be the dimension") from None
    rows = lines[1:]
    if n <= 0 or len(rows) != n:
        raise FormatError(f"expected {n} rows, found {len(rows)}")
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        tokens = row.split()
        if len(tokens) != n:
            raise FormatError(f"row {i} has {len(tokens)} entries, expected {n}")
        out[i] = [_parse_entry(tok) for tok in tokens]
    return out


def format_matrix(M: np.ndarray) -> str:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    lines = [str(M.shape[0])]
    for row in M:
        lines.append(" ".join(f"{fmt_float(z.real)}{'+' if z.imag >= 0 else '-'}{fmt_float(abs(z.imag))}i"
                              for z in row))
    return "\n".join(lines) + "\n"


def read_matrix(path) -> np.ndarray:
    return parse_matrix(Path(path).read_text())


def write_matrix(path, M: np.ndarray) -> None:
    Path(path).write_text(format_matrix(M))


# -- wavefunction checkpoints ---------------------------------------------

def write_wavefunction(path, psi: np.ndarray, axes: Sequence[tuple[int, float]]) -> None:
    psi = np.ascontiguousarray(psi, dtype="<c16")
    if tuple(n for n, _ in axes) != psi.shape:
        raise ValueError("axes do not match the array shape")
    with open(path, "wb") as fh:
        fh.write(WF_MAGIC + struct.pack("<II", VERSION, len(axes)))
        for n, L in axes:
            fh.write(struct.pack("<Id", int(n), float(L)))
        fh.write(psi.tobytes())


def read_wavefunction(path) -> tuple[np.ndarray, list[tuple[int, float]]]:
    data = Path(path).read_bytes()
    if data[:4] != WF_MAGIC:
        raise FormatError("not a wavefunction checkpoint")
    version, naxes = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    off = 12
    axes = []
    for _ in range(naxes):
        n, L = struct.unpack_from("<Id", data, off)
        axes.append((n, L))
        off += 12
    shape = tuple(n for n, _ in axes)
    expected = int(np.prod(shape)) * 16
    if len(data) - off != expected:
        raise FormatError("payload size does not match header")
    psi = np.frombuffer(data, dtype="<c16", offset=off).reshape(shape).copy()
    return psi, axes


def save_grid_wavefunction(path, wf) -> None:
    """Checkpoint a ``qdyn.WaveFunction`` (every axis shares N and L)."""
    g = wf.grid
    write_wavefunction(path, wf.psi, [(g.N, g.L)] * wf.psi.ndim)


def load_grid_wavefunction(path):
    from .qdyn import Grid, WaveFunction

    psi, axes = read_wavefunction(path)
    if len({a for a in axes}) != 1:
        raise FormatError("axes differ; not a uniform grid checkpoint")
    N, L = axes[0]
    return WaveFunction(Grid(N, L, len(axes)), psi)


# -- named array snapshots -------------------------------------------------

def write_snapshot(path, arrays: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(FS_MAGIC + struct.pack("<II", VERSION, len(arrays)))
        for name, arr in arrays.items():
            a = np.ascontiguousarray(arr, dtype="<f8")
            key = name.encode()
            fh.write(struct.pack("<I", len(key)) + key + struct.pack("<I", a.ndim))
            fh.write(struct.pack(f"<{a.ndim}Q", *a.shape))
            fh.write(a.tobytes())


def read_snapshot(path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if data[:4] != FS_MAGIC:
        raise FormatError("not a field snapshot")
    version, count = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    off = 12
    out = {}
    for _ in range(count):
        (klen,) = struct.unpack_from("<I", data, off)
        off += 4
        name = data[off:off + klen].decode()
        off += klen
        (ndim,) = struct.unpack_from("<I", data, off)
        off += 4
        shape = struct.unpack_from(f"<{ndim}Q", data, off)
        off += 8 * ndim
        size = int(np.prod(shape)) * 8
        out[name] = np.frombuffer(data, dtype="<f8", count=size // 8, offset=off).reshape(shape).copy()
        off += size
    if off != len(data):
        raise FormatError("trailing bytes after last record")
    return out


def save_field_snapshot(path, state, channels) -> None:
    write_snapshot(path, {"t": np.array([state.t]), "A": state.A, "E": state.E,
                          "E_bnd": state.E_bnd, "lambda_lm": channels.lam, "f_lm": channels.f})


# -- CSV -------------------------------------------------------------------

def write_csv(path, header: Sequence[str], rows) -> None:
    """One header row, then numeric rows formatted with 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) if isinstance(v, (float, np.floating, int, np.integer))
                        and not isinstance(v, bool) else v for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def trajectory_columns(traj) -> tuple[list[str], np.ndarray]:
    """Flatten an ``extdyn.Trajectory`` to (t, x_i..., p_i..., lambda_i..., m_i...)."""
    K, n, d = traj.x.shape
    axes = "xyz"[:d]
    names = ["t"]
    names += [f"x_{i}{'' if d == 1 else '_' + axes[k]}" for i in range(n) for k in range(d)]
    names += [f"p_{i}{'' if d == 1 else '_' + axes[k]}" for i in range(n) for k in range(d)]
    names += [f"lambda_{i}" for i in range(n)] + [f"m_{i}" for i in range(n)]
    data = np.column_stack([traj.times, traj.x.reshape(K, -1), traj.p.reshape(K, -1),
                            traj.lam, np.tile(traj.m, (K, 1))])
    return names, data


def write_trajectory_csv(path, traj) -> None:
    names, data = trajectory_columns(traj)
    write_csv(path, names, data.tolist())
