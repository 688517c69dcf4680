"""Report figures rendered to files next to the delimited outputs.

Matplotlib is imported lazily and driven through the Agg backend so the
CLI works headless.  Figures are written with a fixed hash salt and no
embedded creation date, keeping repeated runs byte-identical.
"""

from __future__ import annotations

import math
from typing import Optional

from .laws import LawSeries

FIG_SIZE = (6.4, 4.4)
SERIES_STYLE = {
    "sarnoff": dict(color="#1f77b4", marker="o", label="audience (degree >= 1)"),
    "m": dict(color="#d62728", marker="s", label="edges"),
    "reed_log2": dict(color="#2ca02c", marker="^", label="subset count (log2 domain)"),
    "kqi_bits": dict(color="#9467bd", marker="d", label="knowledge (bits)"),
}


def _pyplot():
    import matplotlib
    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "citenet"
    return plt


def _save(fig, path) -> None:
    path = str(path)
    kwargs = {}
    if path.endswith(".svg"):
        kwargs["metadata"] = {"Date": None}
    fig.savefig(path, bbox_inches="tight", **kwargs)


def plot_law_series(series: LawSeries, path, title: Optional[str] = None) -> None:
    """Log2-log2 chart of the four network-value series against network size."""
    plt = _pyplot()
    ns = series.column("n")
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    for name, style in SERIES_STYLE.items():
        ys = series.column(name)
        xs = [x for x, y in zip(ns, ys) if x > 0 and y > 0]
        vals = [y for x, y in zip(ns, ys) if x > 0 and y > 0]
        if xs:
            ax.plot([math.log2(x) for x in xs], [math.log2(y) for y in vals],
                    linewidth=1.2, markersize=3.5, **style)
    ax.set_xlabel("log2 network size n")
    ax.set_ylabel("log2 value")
    ax.set_title(title or "network value laws")
    ax.legend(fontsize=8, frameon=False)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def plot_annual_counts(counts: list[tuple[int, int]], path,
                       title: Optional[str] = None) -> None:
    """Publication volume per year."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    if counts:
        years = [y for y, _ in counts]
        values = [c for _, c in counts]
        ax.plot(years, values, color="#1f77b4", linewidth=1.4)
        ax.fill_between(years, values, color="#1f77b4", alpha=0.15)
    ax.set_xlabel("year")
    ax.set_ylabel("papers")
    ax.set_title(title or "annual publication counts")
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
