"""PNG figures for the tabular series a scenario produces."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _loglog_with_slope(ax, x, y, order: int, label: str):
    ax.loglog(x, y, "o-", label=label)
    ref = y[0] * (np.asarray(x) / x[0]) ** order
    ax.loglog(x, ref, "k--", lw=0.8, label=f"slope {order}")
    ax.legend()


def _maxwell_history(header, data, path):
    cols = {h: i for i, h in enumerate(header)}
    t = data[:, cols["t"]]
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5), constrained_layout=True)
    g = data[:, cols["gauss_max"]]
    axes[0, 0].semilogy(t, np.maximum(np.abs(g - g[0]), 1e-18))
    axes[0, 0].set(title="Gauss residual drift", xlabel="t", ylabel="|max G(t) - max G(0)|")
    glm = [i for h, i in cols.items() if h.startswith("G_lm_")]
    drift = np.abs(data[:, glm] - data[0, glm]).max(axis=1)
    axes[0, 1].semilogy(t, np.maximum(drift, 1e-18))
    axes[0, 1].set(title="boundary constraint drift", xlabel="t", ylabel="max |G_lm(t) - G_lm(0)|")
    axes[1, 0].plot(t, data[:, cols["lam_0_0"]])
    axes[1, 0].set(title="lambda_00", xlabel="t")
    q = data[:, cols["Q"]]
    axes[1, 1].semilogy(t, np.maximum(np.abs(q - q[0]), 1e-18))
    axes[1, 1].set(title="charge drift", xlabel="t", ylabel="|Q(t) - Q(0)|")
    fig.savefig(path, dpi=90)
    plt.close(fig)


def _rate(header, data, path, order, title):
    fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
    _loglog_with_slope(ax, data[:, 0], data[:, 1], order, "measured")
    ax.set(title=title, xlabel=header[0], ylabel=header[1])
    fig.savefig(path, dpi=90)
    plt.close(fig)


def _phase(header, data, path):
    cols = {h: i for i, h in enumerate(header)}
    fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
    ax.semilogy(data[:, cols["N"]], np.maximum(data[:, cols["error"]], 1e-18), "o-")
    ax.set(title="composition phase error", xlabel="grid points per axis", ylabel="|phase error| (rad)")
    fig.savefig(path, dpi=90)
    plt.close(fig)


RENDERERS = {
    "maxwell_history": _maxwell_history,
    "lambda_rate": lambda h, d, p: _rate(h, d, p, 2, "dlambda_00/dt + phi_00"),
    "symmetry_scaling": lambda h, d, p: _rate(h, d, p, 4, "transformed-trajectory residual"),
    "phase_refinement": _phase,
}


def render(name: str, header, data, out_dir) -> Path | None:
    """Render a known series to ``<out_dir>/<name>.png``; unknown names are skipped."""
    fn = RENDERERS.get(name)
    if fn is None:
        return None
    arr = np.asarray(data, dtype=float)
    path = Path(out_dir) / f"{name}.png"
    fn(list(header), arr, path)
    return path
