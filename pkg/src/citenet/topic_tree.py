"""Concept co-occurrence networks and multi-level topic hierarchies.

Concepts that appear together in documents form a weighted co-occurrence
graph; community detection on that graph yields the leaf topics, and
repeatedly contracting communities into hyper-nodes (summing the crossing
weights) grows the upper levels until everything merges under one root.
Topics are labeled by the keywords with the highest mutual information
against topic membership, optionally matched against a dictionary of
known entity names.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .community import label_propagation


@dataclass(frozen=True)
class ConceptCorpus:
    """Documents as deduplicated concept-token sets."""

    documents: tuple[tuple[str, frozenset[str]], ...]
    vocabulary: dict[str, int]

    @classmethod
    def from_documents(cls, docs: Sequence[tuple[str, Sequence[str]]]) -> "ConceptCorpus":
        seen_ids = set()
        documents = []
        vocab: dict[str, int] = {}
        for doc_id, tokens in docs:
            if doc_id in seen_ids:
                raise ValueError(f"duplicate doc_id {doc_id!r}")
            seen_ids.add(doc_id)
            token_set = frozenset(t for t in tokens if t)
            if any(not isinstance(t, str) for t in token_set):
                raise ValueError(f"non-string token in {doc_id!r}")
            documents.append((str(doc_id), token_set))
            for t in token_set:
                vocab[t] = vocab.get(t, 0) + 1
        return cls(documents=tuple(documents), vocabulary=vocab)

    def __len__(self) -> int:
        return len(self.documents)


def load_corpus_jsonl(path) -> ConceptCorpus:
    docs = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: bad JSON: {exc}") from None
        if "doc_id" not in row or "concepts" not in row:
            raise ValueError(f"line {lineno}: need doc_id and concepts")
        docs.append((str(row["doc_id"]), [str(c) for c in row["concepts"]]))
    return ConceptCorpus.from_documents(docs)


@dataclass(frozen=True)
class CooccurrenceGraph:
    """Symmetric weighted graph over concept tokens."""

    adjacency: dict[str, dict[str, float]]

    def nodes(self) -> list[str]:
        return sorted(self.adjacency)

    def edge_count(self) -> int:
        return sum(len(v) for v in self.adjacency.values()) // 2


def build_cooccurrence(corpus: ConceptCorpus, min_doc_freq: int = 1,
                       min_pair_count: int = 1) -> CooccurrenceGraph:
    """Tokens below min_doc_freq are dropped; edge weight = joint doc count."""
    if min_doc_freq < 1 or min_pair_count < 1:
        raise ValueError("thresholds must be >= 1")
    if len(corpus) == 0:
        raise ValueError("empty corpus")
    keep = {t for t, df in corpus.vocabulary.items() if df >= min_doc_freq}
    pair_counts: dict[tuple[str, str], int] = {}
    for _, tokens in corpus.documents:
        present = sorted(tokens & keep)
        for i, a in enumerate(present):
            for b in present[i + 1:]:
                pair_counts[(a, b)] = pair_counts.get((a, b), 0) + 1
    adjacency: dict[str, dict[str, float]] = {t: {} for t in sorted(keep)}
    for (a, b), count in pair_counts.items():
        if count >= min_pair_count:
            adjacency[a][b] = float(count)
            adjacency[b][a] = float(count)
    return CooccurrenceGraph(adjacency=adjacency)


@dataclass
class TopicNode:
    node_id: str
    level: int
    tokens: frozenset[str]
    parent: Optional[str] = None
    children: list[str] = field(default_factory=list)
    labels: list[dict] = field(default_factory=list)


@dataclass
class TopicTree:
    """levels[0] are the tokens themselves; the last level is the single root."""

    nodes: dict[str, TopicNode]
    levels: list[list[str]]
    root: str

    def check_partition_property(self) -> None:
        for node in self.nodes.values():
            if not node.children:
                continue
            union: set[str] = set()
            total = 0
            for child_id in node.children:
                child = self.nodes[child_id]
                union |= child.tokens
                total += len(child.tokens)
            if union != set(node.tokens) or total != len(node.tokens):
                raise ValueError(f"children of {node.node_id} do not partition it")


def build_topic_tree(coocc: CooccurrenceGraph, max_levels: int = 5,
                     seed: int = 0) -> TopicTree:
    """Grow the hierarchy by repeated community contraction.

    Level 1 comes from label propagation on the token graph; each further
    level contracts communities to hyper-nodes with summed crossing weights
    and partitions again.  Stops at a single community, at max_levels, or
    when a round stops merging anything.
    """
    if max_levels < 2:
        raise ValueError("max_levels must be >= 2")
    tokens = coocc.nodes()
    nodes: dict[str, TopicNode] = {}
    levels: list[list[str]] = [[]]
    for t in tokens:
        nid = f"t:{t}"
        nodes[nid] = TopicNode(node_id=nid, level=0, tokens=frozenset([t]))
        levels[0].append(nid)

    current_adj: dict = {t: dict(neigh) for t, neigh in coocc.adjacency.items()}
    current_ids = {t: f"t:{t}" for t in tokens}

    level = 0
    while level + 1 < max_levels:
        level += 1
        partition = label_propagation(current_adj, seed=seed + level)
        if partition.community_count == len(current_adj) and level > 1:
            break  # nothing merged; a copy of the previous level helps no one
        groups = partition.members()
        level_ids = []
        next_adj: dict[int, dict[int, float]] = {c: {} for c in range(len(groups))}
        next_ids: dict[int, str] = {}
        for c, members in enumerate(groups):
            nid = f"L{level}:{c}"
            merged = frozenset().union(*(nodes[current_ids[m]].tokens for m in members))
            nodes[nid] = TopicNode(node_id=nid, level=level, tokens=merged)
            for m in members:
                child = current_ids[m]
                nodes[child].parent = nid
                nodes[nid].children.append(child)
            nodes[nid].children.sort()
            level_ids.append(nid)
            next_ids[c] = nid
        # crossing weights are summed into the hyper-edge; each undirected
        # weight is visited once from each endpoint, landing in the two
        # symmetric slots, so no halving is needed
        for u, neigh in current_adj.items():
            cu = partition.assignment[u]
            for v, w in neigh.items():
                cv = partition.assignment[v]
                if cu != cv:
                    next_adj[cu][cv] = next_adj[cu].get(cv, 0.0) + w
        current_adj = {next_ids[c]: {next_ids[d]: w for d, w in neigh.items()}
                       for c, neigh in next_adj.items()}
        current_ids = {next_ids[c]: next_ids[c] for c in next_ids}
        levels.append(level_ids)
        if partition.community_count == 1:
            break

    top = levels[-1]
    if len(top) == 1 and len(levels) > 1:
        root_id = top[0]
    else:
        root_id = f"L{len(levels)}:root"
        merged = frozenset().union(*(nodes[n].tokens for n in top)) if top else frozenset()
        nodes[root_id] = TopicNode(node_id=root_id, level=len(levels),
                                   tokens=merged, children=sorted(top))
        for n in top:
            nodes[n].parent = root_id
        levels.append([root_id])
    tree = TopicTree(nodes=nodes, levels=levels, root=root_id)
    tree.check_partition_property()
    return tree


# ---------------------------------------------------------------------------
# Mutual information and labeling
# ---------------------------------------------------------------------------

def keyword_mutual_information(corpus: ConceptCorpus, token: str,
                               topic: frozenset[str]) -> float:
    """MI in bits between token presence and topic membership per document."""
    if token not in corpus.vocabulary:
        raise ValueError(f"token {token!r} not in vocabulary")
    if not topic:
        raise ValueError("topic must be non-empty")
    n = len(corpus)
    n11 = n10 = n01 = n00 = 0
    for _, tokens in corpus.documents:
        x = token in tokens
        y = bool(tokens & topic)
        if x and y:
            n11 += 1
        elif x:
            n10 += 1
        elif y:
            n01 += 1
        else:
            n00 += 1
    return _mi_from_table(n11, n10, n01, n00, n)


def _mi_from_table(n11: int, n10: int, n01: int, n00: int, n: int) -> float:
    px = (n11 + n10) / n
    py = (n11 + n01) / n
    cells = ((n11, px, py), (n10, px, 1 - py), (n01, 1 - px, py), (n00, 1 - px, 1 - py))
    total = 0.0
    for count, mx, my in cells:
        if count == 0 or mx == 0 or my == 0:
            continue
        p = count / n
        total += p * math.log2(p / (mx * my))
    return max(0.0, total)


def _normalize_token(token: str) -> str:
    token = token.lower()
    if token.endswith("ies") and len(token) > 4:
        return token[:-3] + "y"
    if token.endswith("s") and not token.endswith("ss") and len(token) > 3:
        return token[:-1]
    return token


def fuzzy_match(keyword: str, dictionary: Sequence[str],
                threshold: float = 0.5) -> Optional[str]:
    """Best dictionary entity by token-set Jaccard after case/plural folding."""
    key_tokens = {_normalize_token(t) for t in keyword.split()}
    best: Optional[str] = None
    best_score = 0.0
    for entity in sorted(dictionary):
        ent_tokens = {_normalize_token(t) for t in entity.split()}
        union = key_tokens | ent_tokens
        if not union:
            continue
        score = len(key_tokens & ent_tokens) / len(union)
        if score > best_score:
            best, best_score = entity, score
    return best if best_score >= threshold else None


def label_topics(tree: TopicTree, corpus: ConceptCorpus,
                 dictionary: Sequence[str] = (), top_k: int = 5) -> TopicTree:
    """Attach ranked keyword labels (and dictionary matches) to every topic.

    Works bottom-up: leaves first, parents labeled over their merged token
    sets.  Keywords are ranked by MI descending, ties broken by higher
    document frequency and then lexicographically.
    """
    for level_ids in tree.levels[1:]:
        for nid in level_ids:
            node = tree.nodes[nid]
            scored = []
            for token in sorted(node.tokens):
                if token not in corpus.vocabulary:
                    continue
                mi = keyword_mutual_information(corpus, token, node.tokens)
                scored.append((-mi, -corpus.vocabulary[token], token, mi))
            scored.sort()
            labels = []
            for _, _, token, mi in scored[:top_k]:
                entry = {"keyword": token, "mi_bits": mi}
                if dictionary:
                    match = fuzzy_match(token, dictionary)
                    if match is not None:
                        entry["entity"] = match
                labels.append(entry)
            node.labels = labels
    return tree


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def export_tree_json(tree: TopicTree, path) -> None:
    def encode(nid: str) -> dict:
        node = tree.nodes[nid]
        payload = {
            "node_id": node.node_id,
            "level": node.level,
            "token_count": len(node.tokens),
            "labels": node.labels,
            "children": [encode(c) for c in node.children],
        }
        if node.level <= 1:
            payload["tokens"] = sorted(node.tokens)
        return payload

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(encode(tree.root), fh, sort_keys=True, indent=2)
        fh.write("\n")


def export_tree_csv(tree: TopicTree, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "node_id", "parent_id", "label"])
        for level_ids in tree.levels:
            for nid in level_ids:
                node = tree.nodes[nid]
                label = node.labels[0]["keyword"] if node.labels else ""
                writer.writerow([node.level, nid, node.parent or "", label])
