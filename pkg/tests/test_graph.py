import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltacolor import ValidationError, build_graph
from deltacolor.graph import segment_any, segment_sum
from deltacolor.io import read_edge_list, write_edge_list


def test_path_graph():
    g = build_graph([(0, 1), (1, 2)])
    assert g.n == 3
    assert g.max_degree == 2
    assert list(g.edges()) == [(0, 1), (1, 2)]
    assert g.neighbor_set(1) == {0, 2}


def test_empty_graph_with_declared_n():
    g = build_graph([], n=3)
    assert g.n == 3
    assert g.max_degree == 0
    assert g.num_edges == 0


def test_duplicate_and_reversed_edges_normalize():
    g = build_graph([(0, 1), (1, 0), (0, 1)])
    assert g.num_edges == 1
    assert g.has_edge(0, 1) and g.has_edge(1, 0)


def test_self_loop_rejected():
    with pytest.raises(ValidationError, match="self-loop"):
        build_graph([(0, 0)])


def test_negative_id_rejected():
    with pytest.raises(ValidationError):
        build_graph([(-1, 2)])


def test_malformed_pair_rejected():
    with pytest.raises(ValidationError, match="pair"):
        build_graph([(0, 1, 2)])  # type: ignore[list-item]


def test_id_beyond_declared_n_rejected():
    with pytest.raises(ValidationError, match="declared"):
        build_graph([(0, 5)], n=3)


def test_empty_edge_list_without_n_rejected():
    with pytest.raises(ValidationError):
        build_graph([])


def test_edge_array_and_adjacency_matrix_agree():
    g = build_graph([(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)])
    arr = g.edge_array()
    assert arr.shape == (5, 2)
    mat = g.adjacency_matrix()
    assert mat.sum() == 10
    for u, v in arr:
        assert mat[u, v] and mat[v, u]


@settings(max_examples=80, deadline=None)
@given(
    n=st.integers(min_value=1, max_value=12),
    raw=st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)), max_size=40),
)
def test_build_graph_invariants(n, raw):
    edges = [(u % n, v % n) for u, v in raw if u % n != v % n]
    g = build_graph(edges, n=n)
    degrees = [g.degree(v) for v in range(n)]
    assert g.max_degree == (max(degrees) if degrees else 0)
    for v in range(n):
        nb = g.neighbors(v)
        assert np.all(np.diff(nb) > 0)  # sorted, unique
        assert v not in nb
        for w in nb:
            assert v in g.neighbors(int(w))
    expected = {tuple(sorted(e)) for e in edges}
    assert set(g.edges()) == expected


def test_edge_list_roundtrip(tmp_path):
    g = build_graph([(0, 1), (2, 3), (1, 3)], n=5)
    path = tmp_path / "g.edges"
    write_edge_list(g, path)
    h = read_edge_list(path)
    assert h.n == g.n
    assert list(h.edges()) == list(g.edges())


def test_edge_list_comments_and_header(tmp_path):
    path = tmp_path / "g.edges"
    path.write_text("# a comment\nn 4\n0 1  # trailing\n\n2 3\n")
    g = read_edge_list(path)
    assert g.n == 4
    assert list(g.edges()) == [(0, 1), (2, 3)]


def test_edge_list_malformed_line(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 1\n1 two\n")
    with pytest.raises(ValidationError, match="bad.edges:2"):
        read_edge_list(path)


def test_edge_list_header_must_come_first(tmp_path):
    path = tmp_path / "bad.edges"
    path.write_text("0 1\nn 4\n")
    with pytest.raises(ValidationError, match="header"):
        read_edge_list(path)


def test_segment_helpers_handle_empty_segments():
    indptr = np.array([0, 0, 2, 2, 3])
    values = np.array([1, 0, 1])
    assert segment_sum(values, indptr).tolist() == [0, 1, 0, 1]
    assert segment_any(values.astype(bool), indptr).tolist() == [False, True, False, True]
    # trailing empty segment must not swallow part of its predecessor
    indptr2 = np.array([0, 1, 2, 4, 4])
    values2 = np.array([1, 1, 1, 1])
    assert segment_sum(values2, indptr2).tolist() == [1, 1, 2, 0]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 3), max_size=5), min_size=1, max_size=8))
def test_segment_sum_matches_python_sums(segments):
    flat = np.array([x for seg in segments for x in seg], dtype=np.int64)
    indptr = np.cumsum([0] + [len(seg) for seg in segments])
    expected = [sum(seg) for seg in segments]
    assert segment_sum(flat, np.asarray(indptr)).tolist() == expected
