import math

import numpy as np
import pytest

from citenet.vsan import (
    GRID,
    BlockGraph,
    LayoutConfig,
    _QuadTree,
    _exact_repulsion,
    build_block_graph,
    export_positions_jsonl,
    fine_tune,
    force_layout,
    layout_blocks,
    layout_quality,
    layout_subgraphs,
    render_svg,
    segment_graph,
    stitch,
    vsan_pipeline,
)
from citenet.synth import graph_from_edges, sbm_graph, two_clique_graph


CFG = LayoutConfig(seed=11)


def pairwise_distances(coords, ids):
    return [math.hypot(coords[a][0] - coords[b][0], coords[a][1] - coords[b][1])
            for i, a in enumerate(ids) for b in ids[i + 1:]]


# ---------------------------------------------------------------------------
# force kernel
# ---------------------------------------------------------------------------

def test_single_node_at_origin():
    graph = graph_from_edges([], nodes=["x"])
    pm = force_layout(graph, CFG, iterations=100)
    assert math.hypot(*pm.coords["x"]) < 1e-9


def test_two_node_equilibrium_matches_analytic():
    # symmetric balance: attraction a*d + gravity g*d/2 = repulsion r/d
    graph = graph_from_edges([("b", "a")], years={"a": 2000, "b": 2001})
    pm = force_layout(graph, CFG, iterations=500)
    d = math.hypot(pm.coords["a"][0] - pm.coords["b"][0],
                   pm.coords["a"][1] - pm.coords["b"][1])
    analytic = math.sqrt(CFG.repulsion_scale /
                         (CFG.attraction_scale + CFG.gravity / 2))
    assert abs(d - analytic) / analytic < 0.10


def test_k4_symmetry():
    # six pairwise-equal distances are impossible in the plane; the converged
    # picture is the symmetric square: four equal sides plus two equal
    # diagonals at sqrt(2) the side length
    graph = graph_from_edges([(f"p{i}", f"p{j}") for i in range(4) for j in range(i)],
                             years={f"p{i}": 2000 for i in range(4)})
    pm = force_layout(graph, CFG, iterations=800)
    dists = sorted(pairwise_distances(pm.coords, sorted(pm.coords)))
    sides, diagonals = dists[:4], dists[4:]
    assert max(sides) / min(sides) < 1.05
    assert max(diagonals) / min(diagonals) < 1.05
    assert diagonals[0] / sides[0] == pytest.approx(math.sqrt(2), rel=0.05)


def test_zero_iterations_keeps_initial():
    graph = graph_from_edges([("b", "a")], years={"a": 2000, "b": 2001})
    from citenet.vsan import PositionMap
    initial = PositionMap(coords={"a": (1.0, 2.0), "b": (3.0, 4.0)})
    pm = force_layout(graph, CFG, initial=initial, iterations=0)
    assert pm.coords == initial.coords


def test_barnes_hut_close_to_exact():
    rng = np.random.default_rng(3)
    points = rng.normal(size=(2000, 2)) * 40
    masses = np.ones(2000)
    exact = _exact_repulsion(points, masses, 100.0)
    approx = _QuadTree(points, masses).repulsion(100.0, 0.5)
    rel = np.linalg.norm(approx - exact, axis=1) / np.linalg.norm(exact, axis=1)
    assert float(rel.mean()) < 0.02
    assert float(rel.max()) < 0.25


# ---------------------------------------------------------------------------
# segmentation and blocks
# ---------------------------------------------------------------------------

def test_segment_community_mode(two_cliques_small):
    part = segment_graph(two_cliques_small, "community", seed=0)
    assert part.community_count == 2


def test_segment_attribute_mode():
    fields = {"A": {"venue_id": "V1"}, "B": {"venue_id": "V1"}, "C": {"venue_id": "V2"}}
    graph = graph_from_edges([("B", "A"), ("C", "B")],
                             years={"A": 1990, "B": 2000, "C": 2010},
                             fields=fields)
    part = segment_graph(graph, "attribute:venue", seed=0)
    assert part.community_count == 2
    assert part.assignment["A"] == part.assignment["B"] != part.assignment["C"]


def test_segment_attribute_missing_goes_to_unknown():
    fields = {f"p{i}": {"venue_id": "V1"} for i in range(200)}
    del fields["p0"]
    edges = [(f"p{i}", f"p{i-1}") for i in range(1, 200)]
    graph = graph_from_edges(edges, years={f"p{i}": 2000 for i in range(200)},
                             fields=fields)
    part = segment_graph(graph, "attribute:venue", seed=0)
    assert part.community_count == 2  # V1 plus the unknown block


def test_segment_attribute_unknown_key(two_cliques_small):
    with pytest.raises(ValueError, match="unknown attribute"):
        segment_graph(two_cliques_small, "attribute:nope", seed=0)


def test_segment_attribute_too_sparse():
    graph = graph_from_edges([("b", "a"), ("c", "b")],
                             years={"a": 1990, "b": 2000, "c": 2010})
    with pytest.raises(ValueError, match="missing"):
        segment_graph(graph, "attribute:venue", seed=0)


def test_build_block_graph_counts(two_triangles_bridge):
    part = segment_graph(two_triangles_bridge, "community", seed=1)
    blocks = build_block_graph(two_triangles_bridge, part)
    assert len(blocks.blocks) == 2
    assert list(blocks.block_edges.values()) == [1.0]
    for _, members, intra, radius in blocks.blocks:
        assert members == 3
        assert intra == 3
        assert radius == pytest.approx(math.sqrt(3))


def test_block_graph_weights():
    # 3 communities pairwise connected by 2, 0, 5 edges
    edges = []
    ids = {c: [f"{c}{i}" for i in range(4)] for c in "xyz"}
    for c, nodes in ids.items():
        edges += [(nodes[i], nodes[j]) for i in range(4) for j in range(i)]
    edges += [("x0", "y0"), ("x1", "y1")]
    edges += [("y0", "z0"), ("y1", "z1"), ("y2", "z2"), ("y3", "z3"), ("y0", "z1")]
    graph = graph_from_edges(edges, years={v: 2000 for vs in ids.values() for v in vs})
    from citenet.community import Partition
    assignment = {v: i for i, c in enumerate("xyz") for v in ids[c]}
    part = Partition(assignment, 3)
    blocks = build_block_graph(graph, part)
    assert blocks.block_edges == {(0, 1): 2.0, (1, 2): 5.0}


def test_layout_blocks_non_overlap_forced():
    bg = BlockGraph(blocks=[(0, 1, 0, 1.0), (1, 4, 0, 2.0)],
                    block_edges={(0, 1): 1.0})
    bg = layout_blocks(bg, CFG)
    (x0, y0), (x1, y1) = bg.centers[0], bg.centers[1]
    assert math.hypot(x0 - x1, y0 - y1) >= 3.0


def test_layout_single_block_at_origin():
    bg = BlockGraph(blocks=[(0, 5, 3, math.sqrt(5))], block_edges={})
    bg = layout_blocks(bg, CFG)
    assert bg.centers[0] == (0.0, 0.0)


def test_layout_ten_free_blocks_envelope():
    bg = BlockGraph(blocks=[(i, 1, 0, 1.0) for i in range(10)], block_edges={})
    bg = layout_blocks(bg, CFG)
    centers = [bg.centers[i] for i in range(10)]
    dists = pairwise_distances({i: c for i, c in enumerate(centers)}, list(range(10)))
    assert min(dists) >= 2.0
    assert max(math.hypot(x, y) for x, y in centers) <= 20.0


def test_disk_gap_nonnegative_across_seeds():
    for seed in range(6):
        graph, _ = sbm_graph(6, 40, 0.25, 0.01, seed=seed)
        cfg = LayoutConfig(seed=seed)
        part = segment_graph(graph, "community", seed=seed)
        blocks = layout_blocks(build_block_graph(graph, part), cfg)
        radii = blocks.radii()
        ids = sorted(blocks.centers)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                d = math.hypot(blocks.centers[a][0] - blocks.centers[b][0],
                               blocks.centers[a][1] - blocks.centers[b][1])
                assert d - radii[a] - radii[b] >= 0.0


# ---------------------------------------------------------------------------
# subgraphs, stitching, fine-tune
# ---------------------------------------------------------------------------

def test_subgraph_layouts_fit_their_disks(two_cliques_small):
    part = segment_graph(two_cliques_small, "community", seed=0)
    subs = layout_subgraphs(two_cliques_small, part, CFG)
    radius = math.sqrt(4)
    for sub in subs.values():
        for x, y in sub.coords.values():
            assert math.hypot(x, y) <= 0.9 * radius


def test_singleton_block_local_origin():
    graph = graph_from_edges([("b", "a")], nodes=["solo"],
                             years={"a": 2000, "b": 2001, "solo": 2002})
    part = segment_graph(graph, "community", seed=0)
    subs = layout_subgraphs(graph, part, CFG)
    solo_block = part.assignment["solo"]
    assert subs[solo_block].coords["solo"] == (0.0, 0.0)


def test_triangle_block_equilateral(two_triangles):
    part = segment_graph(two_triangles, "community", seed=2)
    subs = layout_subgraphs(two_triangles, part, CFG)
    for sub in subs.values():
        dists = sorted(pairwise_distances(sub.coords, sorted(sub.coords)))
        assert dists[-1] / dists[0] < 1.05


def test_stitch_is_exact_translation(two_cliques_small):
    part = segment_graph(two_cliques_small, "community", seed=0)
    blocks = layout_blocks(build_block_graph(two_cliques_small, part), CFG)
    subs = layout_subgraphs(two_cliques_small, part, CFG)
    stitched = stitch(blocks, subs)
    assert stitched.provenance == "stitched"
    for bid, sub in subs.items():
        cx, cy = blocks.centers[bid]
        ids = sorted(sub.coords)
        for a in ids:
            assert stitched.coords[a] == (sub.coords[a][0] + cx,
                                          sub.coords[a][1] + cy)
        locals_ = pairwise_distances(sub.coords, ids)
        globals_ = pairwise_distances(stitched.coords, ids)
        assert locals_ == globals_  # bit-exact on the coordinate grid


def test_coordinates_land_on_grid(two_cliques_small):
    part = segment_graph(two_cliques_small, "community", seed=0)
    blocks = layout_blocks(build_block_graph(two_cliques_small, part), CFG)
    subs = layout_subgraphs(two_cliques_small, part, CFG)
    for sub in subs.values():
        for x, y in sub.coords.values():
            assert x == round(x / GRID) * GRID
            assert y == round(y / GRID) * GRID
    for cx, cy in blocks.centers.values():
        assert cx == round(cx / GRID) * GRID


def test_fine_tune_disabled_is_identity(two_cliques_small):
    cfg = LayoutConfig(seed=1, finetune_enabled=False)
    part = segment_graph(two_cliques_small, "community", seed=1)
    blocks = layout_blocks(build_block_graph(two_cliques_small, part), cfg)
    subs = layout_subgraphs(two_cliques_small, part, cfg)
    stitched = stitch(blocks, subs)
    assert fine_tune(two_cliques_small, stitched, cfg) is stitched
    cfg0 = LayoutConfig(seed=1, iterations_finetune=0)
    assert fine_tune(two_cliques_small, stitched, cfg0) is stitched


def test_fine_tune_does_not_degrade_stress():
    graph = two_clique_graph(100)
    cfg = LayoutConfig(seed=4, finetune_enabled=False)
    part = segment_graph(graph, "community", seed=4)
    before = vsan_pipeline(graph, cfg, partition=part)
    tuned = fine_tune(graph, before, LayoutConfig(seed=4))
    s_before = layout_quality(graph, before, part)["normalized_stress"]
    s_after = layout_quality(graph, tuned, part)["normalized_stress"]
    assert s_after <= s_before * 1.01


# ---------------------------------------------------------------------------
# pipeline and quality
# ---------------------------------------------------------------------------

def test_pipeline_separates_two_cliques():
    graph = two_clique_graph(100)
    pos = vsan_pipeline(graph, CFG)
    part = segment_graph(graph, "community", seed=CFG.seed)
    ids = sorted(graph.records)
    groups = {}
    for v in ids:
        groups.setdefault(part.assignment[v], []).append(v)
    centroids = {}
    spreads = {}
    for c, members in groups.items():
        xs = [pos.coords[v][0] for v in members]
        ys = [pos.coords[v][1] for v in members]
        cx, cy = sum(xs) / len(xs), sum(ys) / len(ys)
        centroids[c] = (cx, cy)
        spreads[c] = max(math.hypot(x - cx, y - cy)
                         for x, y in (pos.coords[v] for v in members))
    (c0, c1) = centroids.values()
    assert math.hypot(c0[0] - c1[0], c0[1] - c1[1]) > sum(spreads.values())


def test_pipeline_deterministic(two_cliques_small):
    a = vsan_pipeline(two_cliques_small, CFG)
    b = vsan_pipeline(two_cliques_small, CFG)
    assert a.coords == b.coords


def test_pipeline_thread_count_invariance(two_cliques_small, monkeypatch):
    monkeypatch.setenv("CITENET_THREADS", "1")
    a = vsan_pipeline(two_cliques_small, CFG)
    monkeypatch.setenv("CITENET_THREADS", "4")
    b = vsan_pipeline(two_cliques_small, CFG)
    assert a.coords == b.coords


def test_pipeline_reports_timings(two_cliques_small):
    pos = vsan_pipeline(two_cliques_small, CFG)
    assert set(pos.timings) == {"segment", "block_graph", "block_layout",
                                "subgraph_layout", "stitch", "fine_tune"}


def test_quality_isometric_path_zero_stress():
    graph = graph_from_edges([("b", "a"), ("c", "b")],
                             years={"a": 1990, "b": 2000, "c": 2010})
    from citenet.vsan import PositionMap
    pos = PositionMap(coords={"a": (0.0, 0.0), "b": (1.0, 0.0), "c": (2.0, 0.0)})
    q = layout_quality(graph, pos)
    assert q["normalized_stress"] == pytest.approx(0.0, abs=1e-12)
    assert q["neighborhood_preservation"] == 1.0


def test_quality_random_vs_pipeline_silhouette():
    graph = two_clique_graph(60)
    part = segment_graph(graph, "community", seed=2)
    rng = np.random.default_rng(0)
    from citenet.vsan import PositionMap
    silhouettes = []
    for _ in range(3):
        coords = {v: (float(rng.uniform(-10, 10)), float(rng.uniform(-10, 10)))
                  for v in sorted(graph.records)}
        q = layout_quality(graph, PositionMap(coords=coords), part)
        silhouettes.append(q["silhouette"])
    assert all(abs(s) < 0.2 for s in silhouettes)
    pos = vsan_pipeline(graph, LayoutConfig(seed=2))
    q_vsan = layout_quality(graph, pos, part)["silhouette"]
    assert q_vsan > max(silhouettes)


def test_pipeline_100k_ten_communities_silhouette():
    """Heavyweight regression: a 100k-node graph with 10 planted communities
    lays out with clearly separated clusters (sampled silhouette >= 0.5).
    Segmentation uses the venue attribute, the same move as classifying
    papers by publication venue on a real corpus; fine-tuning is skipped as
    it would be on a graph this size."""
    graph, planted = sbm_graph(10, 10_000, 1.2e-3, 2e-6, seed=31)
    config = LayoutConfig(seed=31, segmentation_mode="attribute:venue",
                          iterations_sub=40, finetune_enabled=False)
    pos = vsan_pipeline(graph, config)
    assert len(pos.coords) == 100_000
    quality = layout_quality(graph, pos, planted, sample_sources=30, seed=0)
    assert quality["silhouette"] >= 0.5


def test_exports(tmp_path, two_cliques_small):
    part = segment_graph(two_cliques_small, "community", seed=0)
    pos = vsan_pipeline(two_cliques_small, CFG)
    jsonl = tmp_path / "pos.jsonl"
    export_positions_jsonl(pos, jsonl, part)
    lines = jsonl.read_text().splitlines()
    assert len(lines) == len(two_cliques_small)
    import json
    row = json.loads(lines[0])
    assert set(row) == {"node_id", "x", "y", "block_id"}
    svg = tmp_path / "layout.svg"
    render_svg(two_cliques_small, pos, svg, part)
    text = svg.read_text()
    assert text.startswith("<svg")
    assert text.count("<circle") == len(two_cliques_small)
