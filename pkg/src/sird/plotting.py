"""Report figures.

Figures are drawn on the Agg canvas without touching pyplot state and saved
with creation metadata stripped, so reruns produce identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

from .graph import WeightedGraph
from .roles import RoleSet
from .sparsify import SparsificationReport

_RC = {"dpi": 100}


def _save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=_RC["dpi"], metadata={"Software": None})
    return path


def plot_entropy_curve(report: SparsificationReport, path: str | Path) -> Path:
    """One-dimensional entropy of the k-NN graph against k, minima marked."""
    ks = sorted(report.entropies)
    hs = [report.entropies[k] for k in ks]
    fig = Figure(figsize=(5.0, 3.2))
    ax = fig.add_subplot(1, 1, 1)
    ax.plot(ks, hs, "o-", color="0.25", lw=1.2, ms=3.5, label=r"$H^1(G_k)$")
    if report.lmse_ks:
        ax.plot(report.lmse_ks, [report.entropies[k] for k in report.lmse_ks], "s",
                mfc="none", mec="tab:blue", ms=8, label="local minima")
    ax.axvline(report.k_star, color="tab:red", ls="--", lw=1,
               label=f"k* = {report.k_star}" + (" (fallback)" if report.fallback else ""))
    ax.set_xlabel("neighbors k")
    ax.set_ylabel("entropy (bits)")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def plot_role_adjacency(g: WeightedGraph, roles: RoleSet, path: str | Path) -> Path:
    """Adjacency matrix with actions grouped by role; role blocks outlined."""
    order = [a for r in roles.roles for a in r.actions]
    adj = g.adjacency_matrix()[np.ix_(order, order)]
    fig = Figure(figsize=(4.6, 4.2))
    ax = fig.add_subplot(1, 1, 1)
    im = ax.imshow(adj, cmap="Greys", interpolation="nearest")
    start = 0
    for r in roles.roles:
        size = len(r.actions)
        ax.add_patch(Rectangle((start - 0.5, start - 0.5), size, size,
                               fill=False, ec="tab:red", lw=1.2))
        start += size
    if len(order) <= 40:
        ticks = [roles.labels[a] for a in order]
        ax.set_xticks(range(len(order)), ticks, rotation=90, fontsize=6)
        ax.set_yticks(range(len(order)), ticks, fontsize=6)
    ax.set_title(f"{len(roles.roles)} roles", fontsize=9)
    fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    fig.tight_layout()
    return _save(fig, path)

