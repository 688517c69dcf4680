"""Seeded synthetic citation graphs for benchmarks and tests."""

from __future__ import annotations

import random
from typing import Optional, Sequence

import numpy as np

from .community import Partition
from .graph_store import CitationGraph, PaperRecord


def _pid(i: int, width: int = 7) -> str:
    return f"p{i:0{width}d}"


def graph_from_edges(edges: Sequence[tuple[str, str]],
                     years: Optional[dict[str, int]] = None,
                     nodes: Optional[Sequence[str]] = None,
                     fields: Optional[dict[str, dict]] = None) -> CitationGraph:
    """Small-fixture helper: build a graph from explicit (citing, cited) pairs.

    `fields` maps paper_id -> extra PaperRecord keyword arguments.
    """
    ids = set(nodes or ())
    for a, b in edges:
        ids.add(a)
        ids.add(b)
    years = years or {}
    fields = fields or {}
    records = {}
    for pid in sorted(ids):
        records[pid] = PaperRecord(paper_id=pid, year=years.get(pid),
                                   **fields.get(pid, {}))
    return CitationGraph(records, edges)


def chain_graph() -> CitationGraph:
    """Three papers where each cites the previous one: C(2010) -> B(2000) -> A(1990)."""
    return graph_from_edges([("B", "A"), ("C", "B")],
                            years={"A": 1990, "B": 2000, "C": 2010})


def complete_citation_graph(n: int, start_year: int = 2000) -> CitationGraph:
    """K_n as a citation graph: paper i (year start+i) cites every earlier paper."""
    records = {}
    edges = []
    for i in range(n):
        records[_pid(i, 3)] = PaperRecord(paper_id=_pid(i, 3), year=start_year + i)
        for j in range(i):
            edges.append((_pid(i, 3), _pid(j, 3)))
    return CitationGraph(records, edges)


def two_clique_graph(clique_size: int, year: int = 2000) -> CitationGraph:
    """Two cliques of equal size joined by a single bridge edge."""
    n = 2 * clique_size
    records = {_pid(i, 5): PaperRecord(paper_id=_pid(i, 5), year=year)
               for i in range(n)}
    edges = []
    for base in (0, clique_size):
        for i in range(clique_size):
            for j in range(i):
                edges.append((_pid(base + i, 5), _pid(base + j, 5)))
    edges.append((_pid(clique_size, 5), _pid(clique_size - 1, 5)))
    return CitationGraph(records, edges)


def erdos_renyi_graph(n: int, p: float, seed: int,
                      start_year: int = 1990, year_span: int = 30) -> CitationGraph:
    """G(n, p) with edges directed from the later paper to the earlier one."""
    rng = random.Random(seed)
    records = {}
    for i in range(n):
        year = start_year + (i * year_span) // max(1, n)
        records[_pid(i)] = PaperRecord(paper_id=_pid(i), year=year)
    edges = []
    for i in range(n):
        for j in range(i):
            if rng.random() < p:
                edges.append((_pid(i), _pid(j)))
    return CitationGraph(records, edges)


def preferential_attachment_dag(n: int, cites: int = 5, seed: int = 0,
                                start_year: int = 1970,
                                year_span: int = 50) -> CitationGraph:
    """Citation DAG grown by preferential attachment.

    Paper i cites `cites` distinct earlier papers sampled proportionally to
    current undirected degree (the usual repeated-endpoint urn), so early
    papers become hubs.  Years increase with the arrival index.
    """
    if n < 1:
        raise ValueError("need at least one node")
    rng = random.Random(seed)
    urn: list[int] = []
    edges: list[tuple[str, str]] = []
    records = {}
    for i in range(n):
        year = start_year + (i * year_span) // max(1, n - 1) if n > 1 else start_year
        records[_pid(i)] = PaperRecord(paper_id=_pid(i), year=year)
        targets: set[int] = set()
        want = min(cites, i)
        if i <= cites:
            targets = set(range(i))
        else:
            while len(targets) < want:
                targets.add(urn[rng.randrange(len(urn))])
        for t in sorted(targets):
            edges.append((_pid(i), _pid(t)))
            urn.append(t)
            urn.append(i)
    return CitationGraph(records, edges)


def sbm_graph(blocks: int, block_size: int, p_in: float, p_out: float,
              seed: int, year: int = 2000) -> tuple[CitationGraph, Partition]:
    """Stochastic block model; returns the graph and the planted partition.

    Edges are directed from the higher-index paper to the lower-index one;
    each paper's venue_id names its planted block, so attribute-mode
    segmentation can recover the blocks exactly.
    """
    n = blocks * block_size
    rng = np.random.default_rng(seed)
    width = len(str(max(1, n - 1)))
    ids = [_pid(i, width) for i in range(n)]
    records = {ids[i]: PaperRecord(paper_id=ids[i], year=year,
                                   venue_id=f"V{i // block_size:04d}")
               for i in range(n)}

    edges: list[tuple[str, str]] = []
    block_pairs = block_size * (block_size - 1) // 2
    if block_size <= 1200:
        iu, ju = np.triu_indices(block_size, k=1)
        for b in range(blocks):
            base = b * block_size
            hit = rng.random(block_pairs) < p_in
            for a, c in zip(iu[hit], ju[hit]):
                edges.append((ids[base + int(c)], ids[base + int(a)]))
    else:
        # wide blocks: sample the (sparse) hit count instead of all pairs
        for b in range(blocks):
            base = b * block_size
            want = rng.binomial(block_pairs, p_in) if p_in > 0 else 0
            chosen: set[tuple[int, int]] = set()
            while len(chosen) < want:
                a = int(rng.integers(0, block_size))
                c = int(rng.integers(0, block_size))
                if a == c:
                    continue
                lo, hi = (a, c) if a < c else (c, a)
                chosen.add((lo, hi))
            for lo, hi in sorted(chosen):
                edges.append((ids[base + hi], ids[base + lo]))

    total_pairs = n * (n - 1) // 2
    inter_pairs = total_pairs - blocks * block_pairs
    want = rng.binomial(inter_pairs, p_out) if p_out > 0 else 0
    chosen = set()
    while len(chosen) < want:
        a = int(rng.integers(0, n))
        c = int(rng.integers(0, n))
        if a == c or a // block_size == c // block_size:
            continue
        lo, hi = (a, c) if a < c else (c, a)
        chosen.add((lo, hi))
    for lo, hi in sorted(chosen):
        edges.append((ids[hi], ids[lo]))

    assignment = {ids[i]: i // block_size for i in range(n)}
    return CitationGraph(records, edges), Partition(assignment, blocks)
