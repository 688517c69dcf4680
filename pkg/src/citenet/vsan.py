"""Multilevel layout for very large citation graphs.

The pipeline has five stages: segment the graph into blocks, lay out the
block-level quotient graph with non-overlapping disks, lay out each block's
subgraph independently, stitch the locals onto the block centers by pure
translation, and optionally fine-tune the whole picture with a few extra
force iterations.

The shared force kernel uses linear edge attraction, inverse-distance
mass-product repulsion (Barnes-Hut above a size cutoff, exact pairwise
below), and a linear central gravity, advanced with an adaptively damped
global step.  Everything is deterministic for a fixed seed: node order is
sorted, random state is a seeded generator, and coordinates are quantized
to a 2^-20 grid before stitching so that the translation is exact in IEEE
arithmetic (stitched intra-block distances are bit-identical to the local
ones).
"""

from __future__ import annotations

import colorsys
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .community import Partition, label_propagation
from .graph_store import CitationGraph

GRID = 2.0 ** -20           # quantization step for exact stitching
BLOCK_RADIUS_UNIT = 1.0     # disk radius = unit * sqrt(member_count)
SEPARATION_MARGIN = 1e-4    # enforced disk gap before quantization
SUBGRAPH_FILL = 0.9         # fraction of the disk a subgraph may fill
JITTER = 1e-6               # displacement applied to coincident points

ATTRIBUTE_KEYS = {
    "venue": "venue_id", "venue_id": "venue_id",
    "affiliation": "affiliation_id", "affiliation_id": "affiliation_id",
    "country": "country",
}


@dataclass(frozen=True)
class LayoutConfig:
    seed: int = 17
    iterations_block: int = 150
    iterations_sub: int = 100
    iterations_finetune: int = 25
    attraction_scale: float = 1.0
    repulsion_scale: float = 100.0
    gravity: float = 0.05
    block_gravity: float = 5.0   # blocks pack tightly; de-overlap keeps them apart
    theta: float = 0.7
    convergence_epsilon: float = 1e-3
    segmentation_mode: str = "community"
    finetune_enabled: bool = True
    exact_repulsion_limit: int = 1024   # above this, use the quadtree
    leaf_bucket: int = 16

    def __post_init__(self):
        if min(self.attraction_scale, self.repulsion_scale, self.gravity) <= 0:
            raise ValueError("force scales must be positive")
        if not (0 < self.theta <= 1):
            raise ValueError("theta must be in (0, 1]")
        if min(self.iterations_block, self.iterations_sub,
               self.iterations_finetune) < 0:
            raise ValueError("iteration counts must be >= 0")


@dataclass(frozen=True)
class PositionMap:
    coords: dict[str, tuple[float, float]]
    provenance: str = "final"
    timings: Optional[dict[str, float]] = None


@dataclass
class BlockGraph:
    blocks: list[tuple[int, int, int, float]]   # (block_id, members, intra_edges, radius)
    block_edges: dict[tuple[int, int], float]
    centers: Optional[dict[int, tuple[float, float]]] = None

    def radii(self) -> dict[int, float]:
        return {bid: radius for bid, _, _, radius in self.blocks}


# ---------------------------------------------------------------------------
# Barnes-Hut quadtree (vectorized traversal)
# ---------------------------------------------------------------------------

class _QuadTree:
    """Bucketed quadtree over 2-D points; builds once per iteration."""

    def __init__(self, points: np.ndarray, masses: np.ndarray, bucket: int = 16):
        self.points = points
        self.masses = masses
        self.bucket = bucket
        self.half: list[float] = []
        self.com: list[np.ndarray] = []
        self.mass: list[float] = []
        self.children: list[Optional[list[int]]] = []
        self.members: list[Optional[np.ndarray]] = []
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        center = (lo + hi) / 2.0
        half = float(max(hi[0] - lo[0], hi[1] - lo[1])) / 2.0 + 1e-9
        self._build(np.arange(len(points)), center[0], center[1], half)

    def _build(self, idx: np.ndarray, cx: float, cy: float, half: float) -> int:
        nid = len(self.half)
        self.half.append(half)
        w = self.masses[idx]
        total = float(w.sum())
        self.mass.append(total)
        self.com.append((self.points[idx] * w[:, None]).sum(axis=0) / total)
        self.children.append(None)
        self.members.append(None)
        if len(idx) <= self.bucket or half < 1e-9:
            self.members[nid] = idx
            return nid
        px = self.points[idx, 0]
        py = self.points[idx, 1]
        east = px > cx
        north = py > cy
        kids = []
        for mask, (qx, qy) in (
            (~east & ~north, (cx - half / 2, cy - half / 2)),
            (east & ~north, (cx + half / 2, cy - half / 2)),
            (~east & north, (cx - half / 2, cy + half / 2)),
            (east & north, (cx + half / 2, cy + half / 2)),
        ):
            sub = idx[mask]
            if len(sub):
                kids.append(self._build(sub, qx, qy, half / 2))
        self.children[nid] = kids
        return nid

    def repulsion(self, scale: float, theta: float) -> np.ndarray:
        points = self.points
        masses = self.masses
        forces = np.zeros_like(points)
        stack: list[tuple[int, np.ndarray]] = [(0, np.arange(len(points)))]
        while stack:
            nid, idx = stack.pop()
            members = self.members[nid]
            if members is not None:
                diff = points[idx, None, :] - points[None, members, :]
                d2 = np.maximum((diff ** 2).sum(axis=2), 1e-18)
                w = masses[idx, None] * masses[None, members] / d2
                w[idx[:, None] == members[None, :]] = 0.0
                forces[idx] += scale * (diff * w[:, :, None]).sum(axis=1)
                continue
            diff = points[idx] - self.com[nid]
            d2 = np.maximum((diff ** 2).sum(axis=1), 1e-18)
            far = (2.0 * self.half[nid]) < (theta * np.sqrt(d2))
            if far.any():
                fidx = idx[far]
                w = masses[fidx] * self.mass[nid] / d2[far]
                forces[fidx] += scale * diff[far] * w[:, None]
            near = idx[~far]
            if len(near):
                for child in self.children[nid]:
                    stack.append((child, near))
        return forces


def _exact_repulsion(points: np.ndarray, masses: np.ndarray,
                     scale: float, chunk: int = 512) -> np.ndarray:
    n = len(points)
    forces = np.zeros_like(points)
    for start in range(0, n, chunk):
        idx = np.arange(start, min(start + chunk, n))
        diff = points[idx, None, :] - points[None, :, :]
        d2 = np.maximum((diff ** 2).sum(axis=2), 1e-18)
        w = masses[idx, None] * masses[None, :] / d2
        w[idx[:, None] == np.arange(n)[None, :]] = 0.0
        forces[idx] = scale * (diff * w[:, :, None]).sum(axis=1)
    return forces


# ---------------------------------------------------------------------------
# Force kernel
# ---------------------------------------------------------------------------

def _simulate(points: np.ndarray, masses: np.ndarray,
              edges: tuple[np.ndarray, np.ndarray, np.ndarray],
              config: LayoutConfig, iterations: int,
              radii: Optional[np.ndarray] = None,
              step_fraction: float = 0.1) -> np.ndarray:
    """Run the damped force iteration in place and return the positions.

    `radii`, when given, adds a hard-core term that activates once two
    disks overlap (used by the block stage).  `step_fraction` sets the
    starting step relative to the layout extent; warm starts use a small
    value so refinement cannot tear an already good picture apart.
    """
    n = len(points)
    if iterations == 0 or n == 0:
        return points
    if n == 1:
        points[:] = 0.0  # gravity fixed point
        return points
    src, dst, weight = edges
    step = max(float(np.abs(points).max()) * step_fraction, 1e-3)
    progress = 0
    prev_energy = math.inf
    for _ in range(iterations):
        if n > config.exact_repulsion_limit:
            tree = _QuadTree(points, masses, bucket=config.leaf_bucket)
            forces = tree.repulsion(config.repulsion_scale, config.theta)
        else:
            forces = _exact_repulsion(points, masses, config.repulsion_scale)
        if len(src):
            delta = points[dst] - points[src]
            pull = config.attraction_scale * weight[:, None] * delta
            np.add.at(forces, src, pull)
            np.add.at(forces, dst, -pull)
        forces -= config.gravity * masses[:, None] * points
        if radii is not None:
            forces += _hardcore_forces(points, radii, config)
        norms = np.sqrt((forces ** 2).sum(axis=1))
        limit = np.minimum(norms, step)
        scale = np.where(norms > 0, limit / np.maximum(norms, 1e-18), 0.0)
        disp = forces * scale[:, None]
        points += disp
        energy = float((norms ** 2).sum())
        if energy < prev_energy:
            progress += 1
            if progress >= 5:
                progress = 0
                step *= 1.2
        else:
            progress = 0
            step *= 0.7
        prev_energy = energy
        if float(np.abs(disp).mean()) < config.convergence_epsilon:
            break
    return points


def _hardcore_forces(points: np.ndarray, radii: np.ndarray,
                     config: LayoutConfig) -> np.ndarray:
    """Linear push-apart force on every overlapping disk pair.

    Candidate pairs come from a KD-tree ball query so the cost stays near
    linear in the block count instead of quadratic.
    """
    from scipy.spatial import cKDTree
    forces = np.zeros_like(points)
    reach = float(2.0 * radii.max())
    pairs = cKDTree(points).query_pairs(r=reach, output_type="ndarray")
    if len(pairs) == 0:
        return forces
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    i, j = pairs[:, 0], pairs[:, 1]
    diff = points[i] - points[j]
    dist = np.sqrt(np.maximum((diff ** 2).sum(axis=1), 1e-18))
    overlap = (radii[i] + radii[j]) - dist
    active = overlap > 0
    if not active.any():
        return forces
    i, j = i[active], j[active]
    push = (overlap[active] / dist[active])[:, None] * diff[active]
    strength = 50.0 * config.attraction_scale
    np.add.at(forces, i, strength * push)
    np.add.at(forces, j, -strength * push)
    return forces


def _initial_positions(n: int, config: LayoutConfig, rng: np.random.Generator) -> np.ndarray:
    radius = math.sqrt(max(n, 1) * config.repulsion_scale / config.attraction_scale) / 2.0
    angles = rng.uniform(0, 2 * math.pi, size=n)
    rad = radius * np.sqrt(rng.uniform(0, 1, size=n))
    return np.column_stack([rad * np.cos(angles), rad * np.sin(angles)])


def _dejitter(points: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Separate exactly coincident points so forces are finite."""
    if len(points) < 2:
        return points
    rounded = [tuple(row) for row in points]
    seen: dict[tuple, int] = {}
    for i, key in enumerate(rounded):
        count = seen.get(key, 0)
        if count:
            angle = rng.uniform(0, 2 * math.pi)
            points[i, 0] += JITTER * count * math.cos(angle)
            points[i, 1] += JITTER * count * math.sin(angle)
        seen[key] = count + 1
    return points


def _quantize(points: np.ndarray) -> np.ndarray:
    return np.round(points / GRID) * GRID


def _stable_seed(seed: int, tag) -> int:
    import zlib
    return (seed * 1000003 + zlib.crc32(str(tag).encode())) % (2 ** 31)


def force_layout(graph, config: LayoutConfig,
                 initial: Optional[PositionMap] = None,
                 iterations: Optional[int] = None) -> PositionMap:
    """Lay out a CitationGraph (or any weighted adjacency) with the force kernel."""
    nodes, edges, masses = _as_mass_graph(graph)
    if iterations is None:
        iterations = config.iterations_sub
    rng = np.random.default_rng(config.seed)
    if initial is not None:
        # warm starts refine: steps stay far below the layout extent so a
        # handful of iterations polishes seams without re-equilibrating
        points = np.array([initial.coords[v] for v in nodes], dtype=float)
        step_fraction = 0.001
    else:
        points = _initial_positions(len(nodes), config, rng)
        step_fraction = 0.1
    points = _dejitter(points, rng)
    points = _simulate(points, masses, edges, config, iterations,
                       step_fraction=step_fraction)
    coords = {v: (float(points[i, 0]), float(points[i, 1]))
              for i, v in enumerate(nodes)}
    return PositionMap(coords=coords, provenance="final")


def _as_mass_graph(graph):
    if isinstance(graph, CitationGraph):
        nodes = graph.node_ids()
        index = {v: i for i, v in enumerate(nodes)}
        pairs = graph.undirected_edges()
        src = np.array([index[a] for a, _ in pairs], dtype=np.int64)
        dst = np.array([index[b] for _, b in pairs], dtype=np.int64)
        weight = np.ones(len(pairs))
        masses = np.ones(len(nodes))
        return nodes, (src, dst, weight), masses
    # weighted adjacency mapping
    nodes = sorted(graph, key=str)
    index = {v: i for i, v in enumerate(nodes)}
    seen = []
    for v in nodes:
        for u, w in sorted(graph[v].items(), key=lambda kv: str(kv[0])):
            if index[v] < index[u]:
                seen.append((index[v], index[u], float(w)))
    src = np.array([s for s, _, _ in seen], dtype=np.int64)
    dst = np.array([d for _, d, _ in seen], dtype=np.int64)
    weight = np.array([w for _, _, w in seen])
    return nodes, (src, dst, weight), np.ones(len(nodes))


# ---------------------------------------------------------------------------
# Pipeline stages
# ---------------------------------------------------------------------------

def segment_graph(graph: CitationGraph, mode: str = "community",
                  seed: int = 0) -> Partition:
    """Partition the graph for the block stage.

    mode "community" runs label propagation; "attribute:<key>" groups by a
    metadata key (venue, affiliation, country), which must be present on at
    least 99% of nodes; the stragglers share an "unknown" block.
    """
    if mode == "community":
        return label_propagation(graph, seed=seed)
    if not mode.startswith("attribute:"):
        raise ValueError(f"unknown segmentation mode {mode!r}")
    key = mode.split(":", 1)[1]
    if key not in ATTRIBUTE_KEYS:
        raise ValueError(f"unknown attribute key {key!r}")
    attr = ATTRIBUTE_KEYS[key]
    values = {}
    missing = 0
    for pid in graph.node_ids():
        value = getattr(graph.records[pid], attr)
        if value is None:
            missing += 1
            value = "\x00unknown"
        values[pid] = value
    if len(graph) and missing / len(graph) > 0.01:
        raise ValueError(
            f"attribute {key!r} missing on {missing}/{len(graph)} nodes (>1%)")
    labels = sorted(set(values.values()))
    remap = {lab: i for i, lab in enumerate(labels)}
    return Partition({pid: remap[v] for pid, v in values.items()}, len(labels))


def build_block_graph(graph: CitationGraph, partition: Partition) -> BlockGraph:
    """Contract each community to one block; edge weight = crossing edge count."""
    members = [0] * partition.community_count
    intra = [0] * partition.community_count
    cross: dict[tuple[int, int], float] = {}
    for pid in graph.records:
        members[partition.assignment[pid]] += 1
    for a, b in graph.undirected_edges():
        ca, cb = partition.assignment[a], partition.assignment[b]
        if ca == cb:
            intra[ca] += 1
        else:
            key = (ca, cb) if ca < cb else (cb, ca)
            cross[key] = cross.get(key, 0.0) + 1.0
    blocks = [(c, members[c], intra[c], BLOCK_RADIUS_UNIT * math.sqrt(members[c]))
              for c in range(partition.community_count)]
    return BlockGraph(blocks=blocks, block_edges=cross)


def layout_blocks(block_graph: BlockGraph, config: LayoutConfig) -> BlockGraph:
    """Place block centers so that no two disks overlap (gap >= 0 exactly)."""
    ids = [bid for bid, _, _, _ in block_graph.blocks]
    masses = np.array([m for _, m, _, _ in block_graph.blocks], dtype=float)
    radii = np.array([r for _, _, _, r in block_graph.blocks], dtype=float)
    index = {bid: i for i, bid in enumerate(ids)}
    pairs = sorted(block_graph.block_edges)
    src = np.array([index[a] for a, _ in pairs], dtype=np.int64)
    dst = np.array([index[b] for _, b in pairs], dtype=np.int64)
    weight = np.array([block_graph.block_edges[p] for p in pairs])

    rng = np.random.default_rng(_stable_seed(config.seed, "blocks"))
    if len(ids) == 1:
        centers = np.zeros((1, 2))
    else:
        from dataclasses import replace
        block_config = replace(config, gravity=config.block_gravity)
        points = _initial_positions(len(ids), config, rng)
        points *= max(1.0, float(radii.mean()))
        points = _dejitter(points, rng)
        points = _simulate(points, masses, (src, dst, weight), block_config,
                           config.iterations_block, radii=radii)
        centers = _separate_disks(points, radii, masses)
    centers = _quantize(centers)
    block_graph.centers = {bid: (float(centers[i, 0]), float(centers[i, 1]))
                           for i, bid in enumerate(ids)}
    return block_graph


def _overlap_candidates(points: np.ndarray, radii: np.ndarray) -> np.ndarray:
    from scipy.spatial import cKDTree
    reach = float(2.0 * radii.max()) + SEPARATION_MARGIN
    pairs = cKDTree(points).query_pairs(r=reach, output_type="ndarray")
    if len(pairs):
        pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def _separate_disks(points: np.ndarray, radii: np.ndarray,
                    masses: np.ndarray) -> np.ndarray:
    """Deterministic sweep that removes residual disk overlap.

    Candidate pairs are refreshed per pass from a KD tree; within a pass
    they are resolved sequentially in index order, heavier disks moving
    less.  Any pair still overlapping (overlap distance is bounded by the
    query reach) is caught on the next pass.
    """
    if len(points) < 2:
        return points
    for _ in range(200):
        moved = False
        for i, j in _overlap_candidates(points, radii):
            diff = points[i] - points[j]
            d = float(np.sqrt((diff ** 2).sum()))
            need = radii[i] + radii[j] + SEPARATION_MARGIN
            if d >= need:
                continue
            gap = need - d
            if d < 1e-12:
                direction = np.array([1.0, 0.0])
            else:
                direction = diff / d
            share_i = masses[j] / (masses[i] + masses[j])
            points[i] += direction * gap * share_i * 1.0001
            points[j] -= direction * gap * (1 - share_i) * 1.0001
            moved = True
        if not moved:
            return points
    # stubborn overlaps: inflate the whole picture until clear
    for _ in range(64):
        pairs = _overlap_candidates(points, radii)
        if len(pairs) == 0:
            return points
        dist = np.sqrt(((points[pairs[:, 0]] - points[pairs[:, 1]]) ** 2).sum(axis=1))
        if (dist >= radii[pairs[:, 0]] + radii[pairs[:, 1]] + SEPARATION_MARGIN).all():
            return points
        points *= 1.25
    raise RuntimeError("disk separation failed to converge")


def layout_subgraphs(graph: CitationGraph, partition: Partition,
                     config: LayoutConfig) -> dict[int, PositionMap]:
    """Independent per-block layouts, each scaled to fit its block disk."""
    radii = {c: BLOCK_RADIUS_UNIT * math.sqrt(m)
             for c, m in enumerate(_member_counts(partition))}
    groups: dict[int, list[str]] = {c: [] for c in range(partition.community_count)}
    for pid in sorted(graph.records):
        groups[partition.assignment[pid]].append(pid)
    member_edges: dict[int, list[tuple[str, str]]] = {c: [] for c in groups}
    for a, b in graph.undirected_edges():
        ca, cb = partition.assignment[a], partition.assignment[b]
        if ca == cb:
            member_edges[ca].append((a, b))

    def one(block_id: int) -> tuple[int, PositionMap]:
        nodes = groups[block_id]
        sub_seed = _stable_seed(config.seed, f"sub:{block_id}")
        rng = np.random.default_rng(sub_seed)
        points = _initial_positions(len(nodes), config, rng)
        points = _dejitter(points, rng)
        index = {v: i for i, v in enumerate(nodes)}
        pairs = member_edges[block_id]
        src = np.array([index[a] for a, _ in pairs], dtype=np.int64)
        dst = np.array([index[b] for _, b in pairs], dtype=np.int64)
        weight = np.ones(len(pairs))
        points = _simulate(points, np.ones(len(nodes)), (src, dst, weight),
                           config, config.iterations_sub)
        points = _fit_to_disk(points, radii[block_id])
        coords = {v: (float(points[i, 0]), float(points[i, 1]))
                  for i, v in enumerate(nodes)}
        return block_id, PositionMap(coords=coords, provenance="block")

    workers = _thread_count()
    order = sorted(groups)
    if workers > 1 and len(order) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(one, order))
    else:
        results = dict(one(c) for c in order)
    return results


def _member_counts(partition: Partition) -> list[int]:
    counts = [0] * partition.community_count
    for c in partition.assignment.values():
        counts[c] += 1
    return counts


def _fit_to_disk(points: np.ndarray, radius: float) -> np.ndarray:
    if len(points) == 0:
        return points
    points = points - points.mean(axis=0)
    extent = float(np.sqrt((points ** 2).sum(axis=1)).max())
    budget = SUBGRAPH_FILL * radius - 1e-5
    if extent > 0 and budget > 0:
        points *= budget / extent
    return _quantize(points)


def _thread_count() -> int:
    raw = os.environ.get("CITENET_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def stitch(block_graph: BlockGraph,
           sub_layouts: dict[int, PositionMap]) -> PositionMap:
    """Translate each block-local layout onto its block center."""
    if block_graph.centers is None:
        raise ValueError("layout_blocks must run before stitch")
    coords: dict[str, tuple[float, float]] = {}
    for block_id in sorted(sub_layouts):
        if block_id not in block_graph.centers:
            raise ValueError(f"no center for block {block_id}")
        cx, cy = block_graph.centers[block_id]
        for node, (x, y) in sub_layouts[block_id].coords.items():
            coords[node] = (x + cx, y + cy)
    return PositionMap(coords={k: coords[k] for k in sorted(coords)},
                       provenance="stitched")


def fine_tune(graph: CitationGraph, positions: PositionMap,
              config: LayoutConfig) -> PositionMap:
    """A few warm-started force iterations over the whole graph; optional."""
    missing = set(graph.records) - set(positions.coords)
    if missing:
        raise ValueError(f"positions missing for {len(missing)} nodes")
    if not config.finetune_enabled or config.iterations_finetune == 0:
        return positions
    result = force_layout(graph, config, initial=positions,
                          iterations=config.iterations_finetune)
    return PositionMap(coords=result.coords, provenance="final")


def vsan_pipeline(graph: CitationGraph, config: LayoutConfig,
                  partition: Optional[Partition] = None) -> PositionMap:
    """segment -> block graph -> block layout -> subgraph layouts -> stitch -> tune."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    if partition is None:
        partition = segment_graph(graph, config.segmentation_mode, seed=config.seed)
    timings["segment"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    blocks = build_block_graph(graph, partition)
    timings["block_graph"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    blocks = layout_blocks(blocks, config)
    timings["block_layout"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    subs = layout_subgraphs(graph, partition, config)
    timings["subgraph_layout"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    stitched = stitch(blocks, subs)
    timings["stitch"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    final = fine_tune(graph, stitched, config)
    timings["fine_tune"] = time.perf_counter() - t0

    provenance = "final" if config.finetune_enabled and config.iterations_finetune \
        else "stitched"
    return PositionMap(coords=final.coords, provenance=provenance, timings=timings)


# ---------------------------------------------------------------------------
# Quality measures
# ---------------------------------------------------------------------------

def layout_quality(graph: CitationGraph, positions: PositionMap,
                   partition: Optional[Partition] = None,
                   sample_sources: int = 100, seed: int = 0) -> dict:
    """Standard readability surrogates for a layout.

    normalized_stress compares graph distances with (optimally scaled)
    Euclidean ones over BFS samples; neighborhood_preservation is the mean
    overlap of 10 nearest graph neighbors with 10 nearest Euclidean ones;
    silhouette scores coordinate separation against the partition labels.
    """
    nodes = graph.node_ids()
    missing = set(nodes) - set(positions.coords)
    if missing:
        raise ValueError(f"positions missing for {len(missing)} nodes")
    pts = np.array([positions.coords[v] for v in nodes])
    index = {v: i for i, v in enumerate(nodes)}
    rng = np.random.default_rng(seed)
    n = len(nodes)
    sources = list(range(n))
    if n > sample_sources:
        sources = sorted(rng.choice(n, size=sample_sources, replace=False).tolist())

    d_graph: list[float] = []
    d_euclid: list[float] = []
    neighborhood: list[float] = []
    for s in sources:
        hops = _bfs_hops(graph, nodes, index, s)
        reached = [(v, h) for v, h in hops.items() if v != nodes[s]]
        if not reached:
            continue
        for v, h in reached:
            d_graph.append(float(h))
            d_euclid.append(float(np.linalg.norm(pts[index[v]] - pts[s])))
        k = min(10, len(reached))
        graph_near = {v for v, _ in sorted(reached, key=lambda it: (it[1], it[0]))[:k]}
        dist = np.sqrt(((pts - pts[s]) ** 2).sum(axis=1))
        order = sorted((float(dist[i]), nodes[i]) for i in range(n) if i != s)
        euclid_near = {v for _, v in order[:k]}
        neighborhood.append(len(graph_near & euclid_near) / k)

    if d_graph:
        dg = np.array(d_graph)
        de = np.array(d_euclid)
        denom = float((de ** 2).sum())
        alpha = float((dg * de).sum()) / denom if denom > 0 else 0.0
        stress = float(((alpha * de - dg) ** 2).sum() / (dg ** 2).sum())
    else:
        stress = 0.0

    result = {
        "normalized_stress": stress,
        "neighborhood_preservation": float(np.mean(neighborhood)) if neighborhood else 0.0,
        "silhouette": None,
    }
    if partition is not None:
        result["silhouette"] = _silhouette(pts, nodes, partition, rng)
    return result


def _bfs_hops(graph: CitationGraph, nodes: list[str], index: dict[str, int],
              start: int) -> dict[str, int]:
    from collections import deque
    hops = {nodes[start]: 0}
    queue = deque([nodes[start]])
    while queue:
        v = queue.popleft()
        for u in graph.undirected_neighbors[v]:
            if u not in hops:
                hops[u] = hops[v] + 1
                queue.append(u)
    return hops


def _silhouette(pts: np.ndarray, nodes: list[str], partition: Partition,
                rng: np.random.Generator, cap: int = 2000) -> float:
    n = len(nodes)
    keep = np.arange(n)
    if n > cap:
        keep = np.sort(rng.choice(n, size=cap, replace=False))
    sub = pts[keep]
    labels = np.array([partition.assignment[nodes[i]] for i in keep])
    dist = np.sqrt(((sub[:, None, :] - sub[None, :, :]) ** 2).sum(axis=2))
    scores = []
    for i in range(len(keep)):
        same = labels == labels[i]
        same[i] = False
        if not same.any():
            scores.append(0.0)
            continue
        a = float(dist[i, same].mean())
        b = math.inf
        for lab in np.unique(labels):
            if lab == labels[i]:
                continue
            mask = labels == lab
            if mask.any():
                b = min(b, float(dist[i, mask].mean()))
        if not math.isfinite(b):
            scores.append(0.0)
            continue
        scores.append((b - a) / max(a, b) if max(a, b) > 0 else 0.0)
    return float(np.mean(scores)) if scores else 0.0


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def export_positions_jsonl(positions: PositionMap, path,
                           partition: Optional[Partition] = None) -> None:
    import json
    with open(path, "w", encoding="utf-8") as fh:
        for node in sorted(positions.coords):
            x, y = positions.coords[node]
            row = {"node_id": node, "x": x, "y": y,
                   "block_id": partition.assignment[node] if partition else None}
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def export_timings_json(positions: PositionMap, path) -> None:
    import json
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(positions.timings or {}, fh, sort_keys=True, indent=2)
        fh.write("\n")


def block_color(block_id: int) -> str:
    hue = (block_id * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.85)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


def render_svg(graph: CitationGraph, positions: PositionMap, path,
               partition: Optional[Partition] = None,
               render_edges: Optional[bool] = None,
               size: int = 1000) -> None:
    """Static SVG: one color per block, node radius grows with log degree.

    Edge rendering defaults to on, but switches off for graphs with more
    than a million edges unless explicitly requested.
    """
    nodes = sorted(positions.coords)
    if not nodes:
        raise ValueError("empty position map")
    m = graph.undirected_edge_count
    if render_edges is None:
        render_edges = m <= 1_000_000
    xs = np.array([positions.coords[v][0] for v in nodes])
    ys = np.array([positions.coords[v][1] for v in nodes])
    lo = min(float(xs.min()), float(ys.min()))
    hi = max(float(xs.max()), float(ys.max()))
    span = (hi - lo) or 1.0
    margin = 0.05 * size

    def sx(x: float) -> float:
        return margin + (x - lo) / span * (size - 2 * margin)

    def sy(y: float) -> float:
        return size - (margin + (y - lo) / span * (size - 2 * margin))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    if render_edges:
        parts.append('<g stroke="#9999aa" stroke-width="0.3" stroke-opacity="0.35">')
        for a, b in graph.undirected_edges():
            if a in positions.coords and b in positions.coords:
                xa, ya = positions.coords[a]
                xb, yb = positions.coords[b]
                parts.append(f'<line x1="{sx(xa):.2f}" y1="{sy(ya):.2f}" '
                             f'x2="{sx(xb):.2f}" y2="{sy(yb):.2f}"/>')
        parts.append("</g>")
    for v in nodes:
        x, y = positions.coords[v]
        deg = graph.undirected_degree.get(v, 0)
        radius = 1.2 * (1.0 + math.log2(1 + deg))
        color = block_color(partition.assignment[v]) if partition else "#336699"
        parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" '
                     f'r="{radius:.2f}" fill="{color}"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
