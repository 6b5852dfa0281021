import json

import pytest

from nibbler import Graph, PreconditionError, induced_subgraph, parse_graph
from nibbler.graph import graph_from_json_dict, parse_dimacs
from nibbler.instances import gnp


def k4():
    return Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


def test_construction_sorts_and_symmetrizes():
    g = Graph(4, [(3, 1), (0, 2)])
    assert g.adj[1] == (3,)
    assert g.adj[3] == (1,)
    assert g.edges() == ((0, 2), (1, 3))


def test_self_loop_rejected():
    with pytest.raises(PreconditionError):
        Graph(3, [(1, 1)])


def test_duplicate_edge_is_an_error_not_dedup():
    with pytest.raises(PreconditionError, match="duplicate"):
        Graph(3, [(0, 1), (1, 0)])


def test_out_of_range_edge_rejected():
    with pytest.raises(PreconditionError):
        Graph(3, [(0, 3)])


def test_degree_and_max_degree():
    g = k4()
    assert all(g.degree(v) == 3 for v in range(4))
    assert g.max_degree() == 3
    assert Graph(5).max_degree() == 0
    with pytest.raises(PreconditionError):
        g.degree(4)


def test_handshake_on_random_graphs():
    for seed in range(20):
        g = gnp(12, 0.4, seed)
        assert sum(g.degree(v) for v in range(g.n)) == 2 * g.m


def test_induced_subgraph_clique_restriction():
    assert induced_subgraph(k4(), [0, 1, 2]).edges() == ((0, 1), (0, 2), (1, 2))


def test_induced_subgraph_empty_set():
    sub = induced_subgraph(k4(), [])
    assert sub.n == 0 and sub.m == 0


def test_induced_subgraph_identity():
    g = gnp(10, 0.5, 3)
    assert induced_subgraph(g, range(10)) == g


def test_induced_subgraph_relabels_ascending():
    g = Graph(6, [(1, 4), (4, 5), (1, 5)])
    sub = induced_subgraph(g, [5, 1, 4])
    # order 1,4,5 -> 0,1,2
    assert sub.edges() == ((0, 1), (0, 2), (1, 2))


def test_induced_subgraph_out_of_range():
    with pytest.raises(PreconditionError):
        induced_subgraph(k4(), [0, 9])


def test_json_round_trip_byte_identical():
    g = Graph(5, [(0, 3), (1, 2), (2, 4)], labels=["a", "b", "c", "d", "e"])
    text = g.to_canonical_json()
    again = graph_from_json_dict(json.loads(text))
    assert again.to_canonical_json() == text
    assert again == g
    assert again.labels == g.labels


def test_parse_auto_detects_json():
    g = parse_graph('{"n": 3, "edges": [[0, 1]]}')
    assert g.edges() == ((0, 1),)


def test_dimacs_parse_one_indexed():
    text = "c a comment\np edge 4 3\ne 1 2\ne 2 3\ne 3 4\n"
    g = parse_dimacs(text)
    assert g.n == 4
    assert g.edges() == ((0, 1), (1, 2), (2, 3))


def test_dimacs_edge_count_mismatch():
    with pytest.raises(PreconditionError, match="declares"):
        parse_dimacs("p edge 3 2\ne 1 2\n")


def test_dimacs_duplicate_edge_rejected():
    with pytest.raises(PreconditionError, match="duplicate"):
        parse_dimacs("p edge 3 2\ne 1 2\ne 2 1\n")
