"""SVG figures for derivation cascades, refinement curves and scaling fits.

Figures are built on ``matplotlib.figure.Figure`` directly (no pyplot
state) and saved with a fixed hash salt and no date, so reruns produce
identical files.
"""

from __future__ import annotations

import math

import matplotlib
import numpy as np
from matplotlib.figure import Figure

STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 8,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 7,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "lipsub",
    "svg.fonttype": "path",
}
FIGSIZE = (4.2, 2.8)


def _figure():
    with matplotlib.rc_context(STYLE):
        fig = Figure(figsize=FIGSIZE, layout="constrained")
        ax = fig.add_subplot()
    return fig, ax


def save_svg(fig: Figure, path) -> None:
    with matplotlib.rc_context(STYLE):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": "lipsub"})


def cascade(sizes, title: str = "") -> Figure:
    """Step plot of ``|A_k|`` against derivation level ``k``."""
    with matplotlib.rc_context(STYLE):
        fig, ax = _figure()
        k = np.arange(len(sizes))
        ax.step(k, sizes, where="post", color="#2b8cbe")
        ax.plot(k, sizes, "o", color="#08589e")
        ax.set_xlabel("derivation level")
        ax.set_ylabel("points remaining")
        ax.set_xticks(k)
        if title:
            ax.set_title(title)
    return fig


def refinement_curves(levels, lips, defects, circle_lips=None) -> Figure:
    """Lipschitz constant and isometry defect against refinement level (log scale)."""
    with matplotlib.rc_context(STYLE):
        fig, ax = _figure()
        ax.semilogy(levels, lips, "o-", color="#08589e", label="Lipschitz constant")
        if circle_lips is not None:
            ax.semilogy(levels, circle_lips, "s--", color="#7bccc4", label="circle (contrast)")
        ax.semilogy(levels, np.maximum(defects, 1e-16), "^-", color="#d95f0e", label="isometry defect")
        ax.set_xlabel("refinement level")
        ax.set_xticks(list(levels))
        ax.legend(frameon=False)
    return fig


def loglog_scaling(rows, fits) -> Figure:
    """Index against ``1/eps`` on log axes, one series per ``(q, dim)``."""
    with matplotlib.rc_context(STYLE):
        fig, ax = _figure()
        groups = {}
        for r in rows:
            if r["index"] != "inf" and r["index"] > 0:
                groups.setdefault((r["q"], r["dim"]), []).append((1.0 / r["eps"], r["index"]))
        slopes = {(f["q"], f["dim"]): f["slope"] for f in fits}
        for (q, dim), pts in sorted(groups.items()):
            x, y = np.array(pts).T
            s = slopes.get((q, dim))
            tag = f"q={q:g}, dim={dim}" + ("" if s is None else f", slope {s:.2f}")
            ax.loglog(x, y, "o-", label=tag)
        ax.set_xlabel("1/eps")
        ax.set_ylabel("derivation index")
        if groups:
            ax.legend(frameon=False)
    return fig


def defect_bars(labels, values, title: str = "") -> Figure:
    with matplotlib.rc_context(STYLE):
        fig, ax = _figure()
        ax.bar(range(len(values)), [max(v, 0.0) for v in values], color="#4eb3d3")
        ax.set_xticks(range(len(values)), labels, rotation=30, ha="right")
        if title:
            ax.set_title(title)
        finite = [v for v in values if v > 0 and math.isfinite(v)]
        if finite and max(finite) / min(finite) > 1e3:
            ax.set_yscale("log")
    return fig
