"""Linear-time community partitioning and partition quality measures.

Works on any weighted undirected graph given as ``{node: {neighbor: weight}}``;
a :class:`~citenet.graph_store.CitationGraph` is accepted anywhere and treated
as unit-weighted.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from typing import Mapping, Union

Adjacency = Mapping[object, Mapping[object, float]]


@dataclass(frozen=True)
class Partition:
    """Node -> dense community index; indices are exactly 0..community_count-1."""

    assignment: dict
    community_count: int

    def __post_init__(self):
        used = set(self.assignment.values())
        if used and used != set(range(self.community_count)):
            raise ValueError("community indices must be dense 0..k-1 and non-empty")
        if not used and self.community_count != 0:
            raise ValueError("empty partition must have community_count 0")

    def members(self) -> list[list]:
        groups: list[list] = [[] for _ in range(self.community_count)]
        for node, comm in self.assignment.items():
            groups[comm].append(node)
        for g in groups:
            g.sort(key=str)
        return groups


def as_weighted_adjacency(graph: Union[Adjacency, object]) -> Adjacency:
    if hasattr(graph, "weighted_adjacency"):
        return graph.weighted_adjacency()
    return graph


def _dense_partition(labels: Mapping) -> Partition:
    remap: dict = {}
    assignment = {}
    for node in sorted(labels, key=str):
        lab = labels[node]
        if lab not in remap:
            remap[lab] = len(remap)
        assignment[node] = remap[lab]
    return Partition(assignment, len(remap))


def label_propagation(graph: Union[Adjacency, object], seed: int = 0,
                      max_rounds: int = 100) -> Partition:
    """Asynchronous weighted label propagation, deterministic for a fixed seed.

    Each node adopts the label with the largest total neighbor weight.  When
    several labels tie, the node keeps its current label if that is one of
    them, otherwise it picks among the winners with the seeded generator —
    a deterministic tie must not exist, or its preferred label becomes a
    global attractor that floods across sparse cuts.  Nodes are visited in
    ascending-degree order with a seeded shuffle among equal degrees, so
    dense neighborhoods consolidate before the bridge nodes that join them
    move.  Isolated nodes keep their own label (singleton communities).
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    adj = as_weighted_adjacency(graph)
    nodes = sorted(adj, key=str)
    index = {n: i for i, n in enumerate(nodes)}
    labels = list(range(len(nodes)))
    strength = [sum(adj[n].values()) for n in nodes]
    rng = random.Random(seed)

    for _ in range(max_rounds):
        order = list(range(len(nodes)))
        rng.shuffle(order)
        order.sort(key=lambda i: strength[i])  # stable: shuffle breaks degree ties
        changed = False
        for i in order:
            neigh = adj[nodes[i]]
            if not neigh:
                continue
            tally: dict[int, float] = {}
            for other, w in neigh.items():
                lab = labels[index[other]]
                tally[lab] = tally.get(lab, 0.0) + w
            best = max(tally.values())
            winners = sorted(lab for lab, w in tally.items() if w == best)
            if labels[i] in winners:
                continue
            labels[i] = winners[0] if len(winners) == 1 else rng.choice(winners)
            changed = True
        if not changed:
            break

    return _dense_partition({n: labels[index[n]] for n in nodes})


def modularity(graph: Union[Adjacency, object], partition: Partition) -> float:
    """Newman modularity of a partition on the undirected weighted view."""
    adj = as_weighted_adjacency(graph)
    missing = set(adj) - set(partition.assignment)
    if missing:
        raise ValueError(f"partition does not cover {len(missing)} nodes")
    two_m = sum(sum(neigh.values()) for neigh in adj.values())
    if two_m == 0:
        return 0.0
    intra = [0.0] * partition.community_count
    degree = [0.0] * partition.community_count
    for node, neigh in adj.items():
        c = partition.assignment[node]
        degree[c] += sum(neigh.values())
        for other, w in neigh.items():
            if partition.assignment[other] == c:
                intra[c] += w  # doubles intra weight; halved below
    m = two_m / 2.0
    return math.fsum((intra[c] / 2.0) / m - (degree[c] / two_m) ** 2
                     for c in range(partition.community_count))


def _entropy(counts: list[int], n: int) -> float:
    return -math.fsum((c / n) * math.log2(c / n) for c in counts if c)


def nmi(p: Partition, q: Partition) -> float:
    """Normalized mutual information (arithmetic-mean normalization), in [0, 1]."""
    if set(p.assignment) != set(q.assignment):
        raise ValueError("partitions cover different node sets")
    n = len(p.assignment)
    if n == 0:
        raise ValueError("empty partitions")
    joint: dict[tuple[int, int], int] = {}
    p_counts = [0] * p.community_count
    q_counts = [0] * q.community_count
    for node, cp in p.assignment.items():
        cq = q.assignment[node]
        joint[(cp, cq)] = joint.get((cp, cq), 0) + 1
        p_counts[cp] += 1
        q_counts[cq] += 1
    hp = _entropy(p_counts, n)
    hq = _entropy(q_counts, n)
    if hp == 0.0 and hq == 0.0:
        return 1.0  # both trivial partitions of the same nodes: identical
    mi = math.fsum(
        (c / n) * math.log2((c / n) / ((p_counts[cp] / n) * (q_counts[cq] / n)))
        for (cp, cq), c in joint.items())
    value = 2.0 * mi / (hp + hq)
    return min(1.0, max(0.0, value))


def export_partition_csv(partition: Partition, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node_id", "community"])
        for node in sorted(partition.assignment, key=str):
            writer.writerow([node, partition.assignment[node]])


def import_partition_csv(path) -> Partition:
    assignment: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:2]] != ["node_id", "community"]:
            raise ValueError("partition CSV needs header node_id,community")
        for row in reader:
            if not row:
                continue
            assignment[row[0]] = int(row[1])
    return _dense_partition(assignment)
