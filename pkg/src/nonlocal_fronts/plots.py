"""Optional SVG output (needs matplotlib)."""
from __future__ import annotations

from pathlib import Path

import numpy as np


def _plt():
    try:
        import matplotlib
    except ImportError as err:  # pragma: no cover - depends on the environment
        raise RuntimeError("--svg needs matplotlib (pip install 'artifact[plot]')") from err
    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "nonlocal-fronts"
    import matplotlib.pyplot as plt
    return plt


def _save(fig, path: Path):
    fig.savefig(path, format="svg", metadata={"Date": None})


def plot_profiles(items, path: Path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7, 4))
    for u, label in items:
        ax.plot(u.x, u.values, lw=1.2, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend(fontsize=8)
    _save(fig, path)
    plt.close(fig)


def plot_track(track, path: Path):
    plt = _plt()
    t, x = np.asarray(track, dtype=float).T
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, x, ".-", ms=2)
    ax.set_xlabel("t")
    ax.set_ylabel("level crossing x(t)")
    _save(fig, path)
    plt.close(fig)


def plot_curves(out: Path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    finite = []
    for d in ("minus", "plus"):
        data = np.loadtxt(out / f"curve_{d}.csv", delimiter=",", skiprows=1, ndmin=2)
        ax.semilogx(data[:, 0], data[:, 1], label=d)
        finite.extend(v for v in data[:, 1] if np.isfinite(v))
    lo = min(finite)
    ax.set_ylim(lo - 0.5, lo + 5)
    ax.set_xlabel("lambda")
    ax.set_ylabel("(M(+-lambda) - 1 + sigma) / lambda")
    ax.legend()
    _save(fig, out / "bounds.svg")
    plt.close(fig)
