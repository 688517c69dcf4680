"""Network-value laws over annual snapshots of a citation graph.

For each snapshot year we record the audience size (nodes with at least
one link), the edge count, the log-domain subset count, and the knowledge
score, then fit log-log slopes to test how each grows with network size.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .graph_store import CitationGraph, snapshot
from .kqi import build_encoding_tree, kqi_total


@dataclass(frozen=True)
class LawRow:
    year: int
    n: int
    m: int
    sarnoff: int
    reed_log2: int
    kqi_bits: float


@dataclass(frozen=True)
class LawSeries:
    rows: tuple[LawRow, ...]
    tree_strategy: str

    def column(self, name: str) -> list:
        return [getattr(row, name) for row in self.rows]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r2: float
    points_used: int
    points_skipped: int = 0

    def as_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "points_used": self.points_used, "points_skipped": self.points_skipped}


def law_series(graph: CitationGraph, years: Sequence[int],
               tree_strategy: str = "citation_primary_parent",
               seed: Optional[int] = None) -> LawSeries:
    """One row per requested year; snapshots without edges report kqi 0."""
    if list(years) != sorted(set(years)):
        raise ValueError("years must be strictly ascending")
    rows = []
    for year in years:
        snap = snapshot(graph, year)
        n = len(snap)
        m = snap.undirected_edge_count
        sarnoff = sum(1 for d in snap.undirected_degree.values() if d >= 1)
        if m == 0:
            k = 0.0
        else:
            tree = build_encoding_tree(snap, tree_strategy, seed=seed)
            k = kqi_total(snap, tree).k
        rows.append(LawRow(year=year, n=n, m=m, sarnoff=sarnoff,
                           reed_log2=n, kqi_bits=k))
    return LawSeries(rows=tuple(rows), tree_strategy=tree_strategy)


def fit_loglog(xs: Sequence[float], ys: Sequence[float]) -> SlopeFit:
    """Ordinary least squares on (log2 x, log2 y); non-positive rows skipped."""
    if len(xs) != len(ys):
        raise ValueError("xs and ys must have equal length")
    pairs = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    skipped = len(xs) - len(pairs)
    if len(pairs) < 2:
        raise ValueError("need at least 2 positive points for a log-log fit")
    lx = [math.log2(x) for x, _ in pairs]
    ly = [math.log2(y) for _, y in pairs]
    n = len(pairs)
    mx = math.fsum(lx) / n
    my = math.fsum(ly) / n
    sxx = math.fsum((v - mx) ** 2 for v in lx)
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(lx, ly))
    if sxx == 0:
        raise ValueError("all x values identical after log transform")
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_tot = math.fsum((v - my) ** 2 for v in ly)
    ss_res = math.fsum((b - (intercept + slope * a)) ** 2 for a, b in zip(lx, ly))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return SlopeFit(slope=slope, intercept=intercept, r2=r2,
                    points_used=n, points_skipped=skipped)


def count_connected_subgraphs(graph: CitationGraph) -> int:
    """Number of non-empty vertex subsets inducing a connected subgraph.

    Exhaustive enumeration over bitmasks; refuses graphs above 20 nodes.
    """
    nodes = graph.node_ids()
    n = len(nodes)
    if n > 20:
        raise ValueError(f"exhaustive subgraph count limited to 20 nodes, got {n}")
    index = {v: i for i, v in enumerate(nodes)}
    neighbor_mask = [0] * n
    for a, b in graph.undirected_edges():
        neighbor_mask[index[a]] |= 1 << index[b]
        neighbor_mask[index[b]] |= 1 << index[a]

    count = 0
    for subset in range(1, 1 << n):
        start = (subset & -subset).bit_length() - 1
        seen = 1 << start
        frontier = seen
        while frontier:
            reach = 0
            f = frontier
            while f:
                i = (f & -f).bit_length() - 1
                f &= f - 1
                reach |= neighbor_mask[i] & subset
            frontier = reach & ~seen
            seen |= frontier
        if seen == subset:
            count += 1
    return count


def export_series_csv(series: LawSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "n", "m", "sarnoff", "reed_log2", "kqi_bits"])
        for row in series.rows:
            writer.writerow([row.year, row.n, row.m, row.sarnoff,
                             row.reed_log2, f"{row.kqi_bits:.12g}"])


def export_fits_json(fits: dict[str, SlopeFit], path) -> None:
    payload = {name: fit.as_dict() for name, fit in sorted(fits.items())}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def standard_fits(series: LawSeries) -> dict[str, SlopeFit]:
    """Slope of each law value against network size n, where fittable."""
    ns = series.column("n")
    fits = {}
    for name in ("m", "sarnoff", "kqi_bits"):
        ys = series.column(name)
        usable = [(x, y) for x, y in zip(ns, ys) if x > 0 and y > 0]
        if len(usable) >= 2 and len({x for x, _ in usable}) >= 2:
            fits[name] = fit_loglog(ns, ys)
    return fits
