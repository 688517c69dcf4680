import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from citenet.synth import chain_graph, graph_from_edges, two_clique_graph


NODES_CSV = """paper_id,date,author_ids,affiliation_id,country,venue_id,field_ids
A,1990,a1|a9,inst1,US,V1,f1|f2
B,2000-06-15,a1,inst1,US,V1,f1
C,2010,a2,inst2,CN,V2,f2
"""

EDGES_CSV = """citing_id,cited_id
B,A
C,B
"""


@pytest.fixture
def chain():
    return chain_graph()


@pytest.fixture
def two_triangles():
    edges = [("a2", "a1"), ("a3", "a1"), ("a3", "a2"),
             ("b2", "b1"), ("b3", "b1"), ("b3", "b2")]
    years = {k: 2000 for k in ("a1", "a2", "a3", "b1", "b2", "b3")}
    return graph_from_edges(edges, years=years)


@pytest.fixture
def two_triangles_bridge():
    edges = [("a2", "a1"), ("a3", "a1"), ("a3", "a2"),
             ("b2", "b1"), ("b3", "b1"), ("b3", "b2"), ("b1", "a1")]
    years = {k: 2000 for k in ("a1", "a2", "a3", "b1", "b2", "b3")}
    return graph_from_edges(edges, years=years)


@pytest.fixture
def two_cliques_small():
    return two_clique_graph(4)


@pytest.fixture
def chain_files(tmp_path):
    nodes = tmp_path / "nodes.csv"
    edges = tmp_path / "edges.csv"
    nodes.write_text(NODES_CSV)
    edges.write_text(EDGES_CSV)
    return nodes, edges
