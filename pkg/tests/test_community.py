import pytest

from citenet.community import (
    Partition,
    export_partition_csv,
    import_partition_csv,
    label_propagation,
    modularity,
    nmi,
)
from citenet.synth import graph_from_edges, sbm_graph
from oracles import best_modularity_partition


def groups_of(partition):
    return sorted(tuple(g) for g in partition.members())


def test_two_cliques_recovered_for_any_seed(two_cliques_small):
    expected, _ = best_modularity_partition(two_cliques_small)
    expected = sorted(tuple(g) for g in expected)
    for seed in range(40):
        part = label_propagation(two_cliques_small, seed=seed)
        assert part.community_count == 2
        assert groups_of(part) == expected


def test_edgeless_graph_singletons():
    graph = graph_from_edges([], nodes=[f"n{i}" for i in range(5)])
    part = label_propagation(graph, seed=0)
    assert part.community_count == 5


def test_complete_graph_single_community():
    k5 = graph_from_edges([(f"p{i}", f"p{j}") for i in range(5) for j in range(i)],
                          years={f"p{i}": 2000 for i in range(5)})
    for seed in (0, 1, 17):
        assert label_propagation(k5, seed=seed).community_count == 1


def test_label_propagation_deterministic(two_cliques_small):
    a = label_propagation(two_cliques_small, seed=123)
    b = label_propagation(two_cliques_small, seed=123)
    assert a.assignment == b.assignment


def test_label_propagation_weighted():
    # heavy pair + light pair: weights should dominate the vote
    adj = {
        "a": {"b": 10.0, "c": 1.0},
        "b": {"a": 10.0, "c": 1.0},
        "c": {"a": 1.0, "b": 1.0, "d": 10.0},
        "d": {"c": 10.0},
    }
    part = label_propagation(adj, seed=2)
    assert part.assignment["a"] == part.assignment["b"]
    assert part.assignment["c"] == part.assignment["d"]
    assert part.assignment["a"] != part.assignment["c"]


def test_partition_invariants_on_random_graphs():
    for seed in range(6):
        graph, _ = sbm_graph(4, 25, 0.3, 0.02, seed=seed)
        part = label_propagation(graph, seed=seed)
        assert set(part.assignment) == set(graph.records)
        assert set(part.assignment.values()) == set(range(part.community_count))


def test_partition_rejects_sparse_indices():
    with pytest.raises(ValueError):
        Partition({"a": 0, "b": 2}, 3)


def test_max_rounds_validation(two_cliques_small):
    with pytest.raises(ValueError):
        label_propagation(two_cliques_small, seed=0, max_rounds=0)


def test_modularity_single_community_zero(two_triangles_bridge):
    nodes = two_triangles_bridge.node_ids()
    part = Partition({v: 0 for v in nodes}, 1)
    assert modularity(two_triangles_bridge, part) == pytest.approx(0.0, abs=1e-12)


def test_modularity_two_triangles_hand_value(two_triangles_bridge):
    part = Partition({"a1": 0, "a2": 0, "a3": 0, "b1": 1, "b2": 1, "b3": 1}, 2)
    # hand evaluation: 2 * (3/7 - (7/14)^2) = 5/14
    assert modularity(two_triangles_bridge, part) == pytest.approx(5 / 14, abs=1e-12)


def test_modularity_singletons_negative(two_triangles_bridge):
    nodes = sorted(two_triangles_bridge.records)
    part = Partition({v: i for i, v in enumerate(nodes)}, len(nodes))
    assert modularity(two_triangles_bridge, part) < 0


def test_modularity_range_property():
    for seed in range(8):
        graph, planted = sbm_graph(3, 20, 0.3, 0.05, seed=seed)
        for part in (planted, label_propagation(graph, seed=seed)):
            q = modularity(graph, part)
            assert -0.5 <= q <= 1.0


def test_nmi_identity_and_relabel():
    p = Partition({"a": 0, "b": 0, "c": 1, "d": 1}, 2)
    q = Partition({"a": 1, "b": 1, "c": 0, "d": 0}, 2)
    assert nmi(p, p) == 1.0
    assert nmi(p, q) == 1.0


def test_nmi_crossed_partition_zero():
    p = Partition({"A": 0, "B": 0, "C": 1, "D": 1}, 2)
    q = Partition({"A": 0, "B": 1, "C": 0, "D": 1}, 2)
    # contingency table is uniform: MI = 0
    assert nmi(p, q) == pytest.approx(0.0, abs=1e-12)


def test_nmi_symmetric():
    for seed in range(5):
        graph, planted = sbm_graph(3, 15, 0.3, 0.05, seed=seed)
        found = label_propagation(graph, seed=seed)
        assert nmi(planted, found) == pytest.approx(nmi(found, planted), abs=1e-12)


def test_nmi_zero_entropy_conventions():
    trivial = Partition({"a": 0, "b": 0}, 1)
    split = Partition({"a": 0, "b": 1}, 2)
    assert nmi(trivial, trivial) == 1.0
    assert nmi(trivial, split) == 0.0


def test_nmi_node_set_mismatch():
    p = Partition({"a": 0}, 1)
    q = Partition({"b": 0}, 1)
    with pytest.raises(ValueError):
        nmi(p, q)


def test_planted_partition_recovery():
    scores = []
    for seed in range(5):
        graph, planted = sbm_graph(10, 100, 0.3, 0.01, seed=seed)
        found = label_propagation(graph, seed=seed)
        scores.append(nmi(found, planted))
    assert sum(scores) / len(scores) >= 0.9


def test_partition_csv_round_trip(tmp_path, two_cliques_small):
    part = label_propagation(two_cliques_small, seed=9)
    path = tmp_path / "part.csv"
    export_partition_csv(part, path)
    again = import_partition_csv(path)
    assert again.assignment == part.assignment
