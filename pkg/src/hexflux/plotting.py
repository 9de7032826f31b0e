"""Static PNG renderings of CLI tables (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, metadata={"Software": None})
    _pyplot().close(fig)
    return path


def plot_dispersion(t, energies, path, title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(t, energies, color="k", lw=0.8)
    ax.set_xlabel("t (path parameter)")
    ax.set_ylabel("E")
    ax.set_title(title)
    return _save(fig, path)


def plot_intervals(rows, path, xlabel="alpha = p/q", colour=None, title=""):
    """Horizontal-flux band plot: each row is ``(alpha, lo, hi)``."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 5))
    rows = list(rows)
    if rows:
        a, lo, hi = map(np.asarray, zip(*rows))
        c = "k" if colour is None else colour
        ax.vlines(a, lo, hi, colors=c, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("E")
    ax.set_title(title)
    return _save(fig, path)


def plot_gap_labels(rows, path, title="gap labels"):
    """Gaps ``(alpha, lo, hi, gamma2)`` coloured by the Hall integer."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 5))
    rows = list(rows)
    if rows:
        a, lo, hi, g = map(np.asarray, zip(*rows))
        g = g.astype(float)
        lim = max(1.0, np.abs(g).max())
        sc = ax.scatter(a, 0.5 * (lo + hi), c=g, cmap="coolwarm", vmin=-lim, vmax=lim, s=6)
        fig.colorbar(sc, ax=ax, label="gamma2")
    ax.set_xlabel("alpha = p/q")
    ax.set_ylabel("gap centre")
    ax.set_title(title)
    return _save(fig, path)


def plot_curves(x, curves: dict, path, xlabel="", ylabel="", title=""):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in curves.items():
        ax.plot(x, y, lw=1.0, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(curves) > 1:
        ax.legend()
    return _save(fig, path)


def plot_scatter(x, y, path, xlabel="", ylabel="", title="", logy=False):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, y, ".", ms=2)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)
