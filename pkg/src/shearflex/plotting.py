"""Figures written straight to PNG files (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .grid import Grid  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    return path


def heatmap(path, grid: Grid, values: np.ndarray, title: str, levels=None) -> Path:
    fig, ax = plt.subplots(figsize=(8, 3))
    X, Y = grid.mesh
    im = ax.pcolormesh(X, Y, values, shading="auto", cmap="RdBu_r")
    if levels is not None and len(levels):
        ax.contour(X, Y, values, levels=sorted(levels), colors="k", linewidths=0.5)
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    return _save(fig, path)


def curves(path, grid: Grid, psi: np.ndarray, level_curves) -> Path:
    """Streamline polylines coloured by classification over a psi heatmap."""
    colours = {"regular": "tab:green", "regular-singular": "tab:orange", "singular": "tab:red"}
    fig, ax = plt.subplots(figsize=(8, 3))
    X, Y = grid.mesh
    ax.pcolormesh(X, Y, psi, shading="auto", cmap="Greys", alpha=0.6)
    for cv in level_curves:
        p = cv.points
        if cv.closed:
            p = np.vstack([p, p[:1]])
        # break the polyline where it crosses the periodic seam
        jumps = np.nonzero(np.abs(np.diff(p[:, 0])) > np.pi)[0] + 1
        for part in np.split(p, jumps):
            ax.plot(part[:, 0], part[:, 1], color=colours[cv.classification], lw=0.8)
    ax.set_xlim(0, 2 * np.pi)
    ax.set_ylim(-1, 1)
    ax.set_title("level curves (green regular, orange mixed, red singular)")
    return _save(fig, path)


def slopes(path, eps, series: dict, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    for name, vals in series.items():
        ax.loglog(eps, vals, "o-", label=name)
    ax.set_xlabel("eps")
    ax.legend()
    ax.set_title(title)
    return _save(fig, path)


def series(path, t, columns: dict, title: str, logy: bool = False) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, vals in columns.items():
        (ax.semilogy if logy else ax.plot)(t, vals, label=name)
    ax.set_xlabel("t")
    ax.legend()
    ax.set_title(title)
    return _save(fig, path)


def energy_levels(path, rows) -> Path:
    c = [r.c for r in rows if r.regular]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(c, [r.flux for r in rows if r.regular], label="flux")
    ax.plot(c, [r.length ** 2 / r.mu for r in rows if r.regular], "--", label="length^2 / mu")
    ax.set_xlabel("level c")
    ax.legend()
    ax.set_title("per-level energy densities")
    return _save(fig, path)
