"""Knowledge quantification over citation graphs.

The knowledge score of a graph is the gap between two entropies on its
undirected degree view: the degree-distribution (Shannon) entropy H1 and
the tree entropy HT of a rooted hierarchy over the nodes.  A hierarchy
that captures real structure explains away uncertainty, so K = H1 - HT
measures how much order the citation structure carries.  K decomposes
exactly into per-paper contributions, which aggregate into author,
affiliation, and country rankings.

Tree node ids: graph nodes appear as their own (string) ids; internal
nodes are ints, with 0 reserved for the virtual root.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

from .community import Partition, label_propagation
from .graph_store import CitationGraph, temporal_violations

logger = logging.getLogger(__name__)

ROOT = 0

TreeId = Union[str, int]

STRATEGIES = ("flat", "citation_primary_parent", "community_two_level")


@dataclass
class EncodingTree:
    """Rooted hierarchy over graph nodes with subtree volumes and cut sizes.

    `parent` maps every non-root tree node to its parent; `volume[a]` is the
    summed undirected degree of graph nodes in a's subtree (a itself included
    when a is a graph node); `cut[a]` counts undirected edges leaving that
    subtree.  Degree-0 graph nodes are kept as children of the root with
    volume and cut 0; they contribute nothing to any entropy.
    """

    parent: dict[TreeId, TreeId]
    volume: dict[TreeId, float]
    cut: dict[TreeId, float]
    strategy: str
    root: TreeId = ROOT

    def children(self) -> dict[TreeId, list[TreeId]]:
        out: dict[TreeId, list[TreeId]] = {self.root: []}
        for node in self.tree_nodes():
            out.setdefault(node, [])
        for node, par in self.parent.items():
            out[par].append(node)
        return out

    def tree_nodes(self) -> list[TreeId]:
        """All non-root tree nodes, graph nodes first, in deterministic order."""
        graph_nodes = sorted(n for n in self.parent if isinstance(n, str))
        internal = sorted(n for n in self.parent if not isinstance(n, str))
        return graph_nodes + internal

    def depth_of(self, node: TreeId) -> int:
        d = 0
        while node != self.root:
            node = self.parent[node]
            d += 1
        return d

    def validate(self, graph: CitationGraph) -> None:
        """Cheap structural checks; raises ValueError on violation."""
        vol = graph.volume
        if self.volume.get(self.root) != vol:
            raise ValueError("root volume does not equal graph volume")
        if self.cut.get(self.root) != 0:
            raise ValueError("root cut must be 0")
        for pid in graph.records:
            if pid not in self.parent:
                raise ValueError(f"graph node {pid!r} missing from tree")
        for node, par in self.parent.items():
            if par != self.root and par not in self.parent:
                raise ValueError(f"dangling parent pointer at {node!r}")
            v, pv = self.volume[node], self.volume[par]
            if v > pv + 1e-9:
                raise ValueError(f"subtree volume exceeds parent at {node!r}")
            if isinstance(node, str):
                deg = graph.undirected_degree[node]
                if deg == 0 and (v != 0 or self.cut[node] != 0):
                    raise ValueError(f"isolated node {node!r} must carry 0 volume")
        # acyclicity: every node must reach the root
        for node in self.parent:
            hops = 0
            cur = node
            while cur != self.root:
                cur = self.parent[cur]
                hops += 1
                if hops > len(self.parent) + 1:
                    raise ValueError("parent pointers contain a cycle")


@dataclass(frozen=True)
class EntropyReport:
    h1: float
    ht: float
    k: float
    vol: int
    strategy: str

    def as_dict(self) -> dict:
        return {"h1": self.h1, "ht": self.ht, "k": self.k,
                "vol": self.vol, "strategy": self.strategy}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


@dataclass(frozen=True)
class KqiScores:
    per_node: dict[str, float]
    total: float


@dataclass(frozen=True)
class RankingResult:
    rows: tuple[tuple[str, float], ...]
    skipped: int


def shannon_entropy_h1(graph: CitationGraph) -> float:
    """Degree-distribution entropy in bits; requires at least one edge."""
    vol = graph.volume
    if vol == 0:
        raise ValueError("Shannon entropy undefined on an edgeless graph")
    return -math.fsum(_plogp(graph.undirected_degree[v], vol)
                      for v in graph.node_ids())


def _plogp(degree: float, vol: float) -> float:
    if degree <= 0:
        return 0.0
    p = degree / vol
    return p * math.log2(p)


# ---------------------------------------------------------------------------
# Tree construction
# ---------------------------------------------------------------------------

def build_encoding_tree(graph: CitationGraph, strategy: str = "flat",
                        seed: Optional[int] = None,
                        partition: Optional[Partition] = None) -> EncodingTree:
    """Build the hierarchy a given strategy induces over the graph.

    flat: every node is a child of the root (tree entropy equals H1).
    citation_primary_parent: each paper hangs under the paper it cites with
        the largest degree (ties: earlier date, then smaller id); candidacy
        is restricted to strictly older papers in (year, date, id) order so
        same-year citation cycles cannot create a parent loop.  Papers with
        no usable reference attach to the root.
    community_two_level: label-propagation communities become internal nodes
        (requires `seed`, or pass an explicit `partition`).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")

    if strategy == "flat":
        parent: dict[TreeId, TreeId] = {pid: ROOT for pid in graph.records}
    elif strategy == "citation_primary_parent":
        parent = _citation_parents(graph)
    else:
        if partition is None:
            if seed is None:
                raise ValueError("community_two_level needs a seed or a partition")
            partition = label_propagation(graph, seed=seed)
        parent = {}
        for pid in graph.records:
            parent[pid] = partition.assignment[pid] + 1  # internal ids 1..k
        for c in range(partition.community_count):
            parent[c + 1] = ROOT

    volume, cut = _volumes_and_cuts(graph, parent)
    return EncodingTree(parent=parent, volume=volume, cut=cut, strategy=strategy)


def _citation_parents(graph: CitationGraph) -> dict[TreeId, TreeId]:
    violations = set(temporal_violations(graph))
    order_key = {pid: (rec.date_key(), pid) for pid, rec in graph.records.items()}
    parent: dict[TreeId, TreeId] = {}
    for pid in graph.records:
        candidates = [
            cited for cited in graph.out_neighbors[pid]
            if (pid, cited) not in violations and order_key[cited] < order_key[pid]
        ]
        if not candidates:
            parent[pid] = ROOT
            continue
        # largest degree wins; ties by earlier date, then smaller id
        parent[pid] = min(
            candidates,
            key=lambda c: (-graph.undirected_degree[c], order_key[c]))
    return parent


def _volumes_and_cuts(graph: CitationGraph,
                      parent: dict[TreeId, TreeId]) -> tuple[dict, dict]:
    """One bottom-up pass for V, plus an LCA difference pass for g."""
    children: dict[TreeId, list[TreeId]] = {ROOT: []}
    for node in parent:
        children.setdefault(node, [])
    for node, par in parent.items():
        children.setdefault(par, []).append(node)

    # iterative post-order from the root
    post: list[TreeId] = []
    stack: list[TreeId] = [ROOT]
    depth: dict[TreeId, int] = {ROOT: 0}
    while stack:
        node = stack.pop()
        post.append(node)
        for ch in children[node]:
            depth[ch] = depth[node] + 1
            stack.append(ch)
    post.reverse()  # children before parents

    volume: dict[TreeId, float] = {}
    delta: dict[TreeId, float] = {n: 0.0 for n in children}
    for a, b in graph.undirected_edges():
        delta[a] += 1.0
        delta[b] += 1.0
        delta[_lca(a, b, parent, depth)] -= 2.0

    cut: dict[TreeId, float] = {}
    for node in post:
        v = float(graph.undirected_degree[node]) if isinstance(node, str) else 0.0
        g = delta[node]
        for ch in children[node]:
            v += volume[ch]
            g += cut[ch]
        volume[node] = v
        cut[node] = g
    return volume, cut


def _lca(a: TreeId, b: TreeId, parent: dict, depth: dict) -> TreeId:
    while depth[a] > depth[b]:
        a = parent[a]
    while depth[b] > depth[a]:
        b = parent[b]
    while a != b:
        a = parent[a]
        b = parent[b]
    return a


# ---------------------------------------------------------------------------
# Entropies and attribution
# ---------------------------------------------------------------------------

def structural_entropy(graph: CitationGraph, tree: EncodingTree) -> float:
    """Tree entropy in bits: -sum over non-root a of (g_a/vol) log2(V_a/V_parent)."""
    tree.validate(graph)
    vol = graph.volume
    if vol == 0:
        raise ValueError("tree entropy undefined on an edgeless graph")
    return -math.fsum(_tree_term(tree, node, vol) for node in tree.tree_nodes())


def _tree_term(tree: EncodingTree, node: TreeId, vol: float) -> float:
    g = tree.cut[node]
    v = tree.volume[node]
    if g == 0 or v == 0:
        return 0.0
    return (g / vol) * math.log2(v / tree.volume[tree.parent[node]])


def kqi_total(graph: CitationGraph, tree: EncodingTree) -> EntropyReport:
    h1 = shannon_entropy_h1(graph)
    ht = structural_entropy(graph, tree)
    k = h1 - ht
    if k < 0:
        logger.warning("negative knowledge score %.6g for strategy %s",
                       k, tree.strategy)
    return EntropyReport(h1=h1, ht=ht, k=k, vol=graph.volume, strategy=tree.strategy)


def kqi_per_node(graph: CitationGraph, tree: EncodingTree) -> KqiScores:
    """Per-paper knowledge scores; they sum exactly to kqi_total().k.

    A paper's score is its Shannon term minus its own tree term; the tree
    terms of internal (community) nodes are folded into the papers beneath
    them in proportion to degree, so the telescoping to the total is exact.
    """
    tree.validate(graph)
    vol = graph.volume
    if vol == 0:
        raise ValueError("scores undefined on an edgeless graph")
    terms: dict[str, list[float]] = {pid: [] for pid in graph.records}
    for pid in graph.records:
        deg = graph.undirected_degree[pid]
        if deg > 0:
            terms[pid].append(-_plogp(deg, vol))
            terms[pid].append(_tree_term(tree, pid, vol))

    children = tree.children()
    internal = [n for n in tree.tree_nodes() if not isinstance(n, str)]
    for node in internal:
        term = _tree_term(tree, node, vol)
        if term == 0.0:
            continue
        v_node = tree.volume[node]
        stack = list(children[node])
        while stack:
            cur = stack.pop()
            if isinstance(cur, str):
                deg = graph.undirected_degree[cur]
                if deg > 0:
                    terms[cur].append(term * (deg / v_node))
            stack.extend(children.get(cur, ()))

    per_node = {pid: math.fsum(vals) for pid, vals in terms.items()}
    return KqiScores(per_node=per_node, total=math.fsum(per_node.values()))


def aggregate_scores(scores: KqiScores, graph: CitationGraph, group_by: str,
                     top_k: Optional[int] = None) -> RankingResult:
    """Credit each paper's score to one entity and rank entities.

    group_by: first_author | affiliation | country.  The whole score of a
    paper goes to the entity of its first author (the stored affiliation and
    country already refer to the first author).  Papers missing the key are
    skipped and counted.
    """
    if group_by not in ("first_author", "affiliation", "country"):
        raise ValueError(f"unknown group_by {group_by!r}")
    totals: dict[str, list[float]] = {}
    skipped = 0
    for pid in sorted(scores.per_node):
        rec = graph.records[pid]
        if group_by == "first_author":
            key = rec.first_author
        elif group_by == "affiliation":
            key = rec.affiliation_id
        else:
            key = rec.country
        if key is None:
            skipped += 1
            continue
        totals.setdefault(key, []).append(scores.per_node[pid])
    rows = sorted(((entity, math.fsum(vals)) for entity, vals in totals.items()),
                  key=lambda kv: (-kv[1], kv[0]))
    if top_k is not None:
        rows = rows[:top_k]
    return RankingResult(rows=tuple(rows), skipped=skipped)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def export_scores_tsv(scores: KqiScores, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("paper_id\tkqi_bits\n")
        for pid, val in sorted(scores.per_node.items(), key=lambda kv: (-kv[1], kv[0])):
            fh.write(f"{pid}\t{val:.12g}\n")


def export_ranking_tsv(ranking: RankingResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("rank\tentity_id\tkqi_bits\n")
        for rank, (entity, val) in enumerate(ranking.rows, start=1):
            fh.write(f"{rank}\t{entity}\t{val:.12g}\n")
