import numpy as np
import pytest

from gagnar.core.errors import DataIOError, ValidationError
from gagnar.core.graph import (
    AdjacencyMatrix,
    NetworkData,
    build_weights,
    load_edge_list,
    row_normalized_adjacency,
    shortest_path_distances,
)

from .conftest import path_graph


def floyd_warshall(dense):
    """Reference all-pairs hop counts on the symmetrized graph."""
    n = dense.shape[0]
    sym = np.maximum(dense, dense.T)
    dist = np.where(sym > 0, 1.0, np.inf)
    np.fill_diagonal(dist, 0.0)
    for k in range(n):
        dist = np.minimum(dist, dist[:, [k]] + dist[[k], :])
    return dist


def test_distances_match_floyd_warshall_on_random_directed_graphs():
    rng = np.random.default_rng(3)
    for _ in range(5):
        dense = (rng.random((12, 12)) < 0.12).astype(float)
        np.fill_diagonal(dense, 0.0)
        dist = shortest_path_distances(AdjacencyMatrix.from_array(dense))
        np.testing.assert_array_equal(dist.values, floyd_warshall(dense))


def test_path_graph_weights():
    dist = shortest_path_distances(path_graph(4))
    w = build_weights(dist, h=1.0).to_dense()
    assert w[0, 1] == 1.0
    assert w[0, 2] == pytest.approx(np.exp(-2.0))
    assert w[0, 3] == pytest.approx(np.exp(-3.0))


def test_h_zero_gives_unit_weights_on_connected_graph():
    w = build_weights(shortest_path_distances(path_graph(5)), h=0.0).to_dense()
    off = ~np.eye(5, dtype=bool)
    assert np.all(w[off] == 1.0)


def test_unreachable_pairs_have_zero_weight():
    adj = AdjacencyMatrix.from_edges([(0, 1), (1, 0), (2, 3)], 4)
    dist = shortest_path_distances(adj)
    assert np.isinf(dist.values[0, 2])
    for h in (0.0, 0.5, 3.0):
        w = build_weights(dist, h).to_dense()
        assert w[0, 2] == 0.0 and w[3, 1] == 0.0
        assert w[2, 3] == 1.0


def test_weights_decrease_with_h():
    dist = shortest_path_distances(path_graph(6))
    low = build_weights(dist, 0.2).to_dense()
    high = build_weights(dist, 1.5).to_dense()
    assert np.all(high <= low)
    assert high[0, 5] < low[0, 5]


def test_negative_h_rejected():
    with pytest.raises(ValidationError):
        build_weights(shortest_path_distances(path_graph(3)), -0.1)


def test_sparse_storage_above_threshold():
    dist = shortest_path_distances(path_graph(6))
    w = build_weights(dist, 1.0, dense_threshold=4)
    assert w.is_sparse
    np.testing.assert_allclose(w.to_dense(), build_weights(dist, 1.0).to_dense())
    np.testing.assert_allclose(w.row(2), build_weights(dist, 1.0).row(2))


def test_adjacency_validation():
    with pytest.raises(ValidationError):
        AdjacencyMatrix.from_array(np.eye(3))
    with pytest.raises(ValidationError):
        AdjacencyMatrix.from_array(np.full((2, 2), 0.5))
    with pytest.raises(ValidationError):
        AdjacencyMatrix.from_array(np.zeros((2, 3)))
    with pytest.raises(ValidationError):
        AdjacencyMatrix.from_edges([(0, 0)], 2)
    with pytest.raises(ValidationError):
        AdjacencyMatrix.from_edges([(0, 5)], 2)


def test_duplicate_edges_collapse():
    adj = AdjacencyMatrix.from_edges([(0, 1), (0, 1), (1, 2)], 3)
    assert adj.matrix.nnz == 2
    np.testing.assert_array_equal(adj.out_degrees(), [1, 1, 0])


def test_row_normalized_adjacency_rows_sum_to_one_or_zero():
    adj = AdjacencyMatrix.from_edges([(0, 1), (0, 2), (1, 0)], 4)
    W = row_normalized_adjacency(adj).toarray()
    np.testing.assert_allclose(W.sum(axis=1), [1.0, 1.0, 0.0, 0.0])
    assert W[0, 1] == pytest.approx(0.5)


def test_row_normalization_uses_directed_edges():
    adj = AdjacencyMatrix.from_edges([(0, 1)], 2)
    W = row_normalized_adjacency(adj).toarray()
    assert W[0, 1] == 1.0 and W[1, 0] == 0.0
    # distances still see the edge both ways
    assert shortest_path_distances(adj).values[1, 0] == 1.0


def test_network_with_h_reuses_distances():
    net = NetworkData.build(path_graph(4), h=0.0)
    other = net.with_h(2.0)
    assert other.distances is net.distances
    assert other.h == 2.0
    assert other.weights.to_dense()[0, 3] == pytest.approx(np.exp(-6.0))


def test_load_edge_list_one_based_with_header(tmp_path):
    path = tmp_path / "edges.csv"
    path.write_text("src,dst\n1,2\n2,3\n1,2\n")
    adj = load_edge_list(path, 3, one_based=True)
    np.testing.assert_array_equal(adj.edges(), [[0, 1], [1, 2]])


def test_load_edge_list_rejects_self_loop(tmp_path):
    path = tmp_path / "edges.csv"
    path.write_text("0,1\n2,2\n")
    with pytest.raises(ValidationError):
        load_edge_list(path, 3)


def test_load_edge_list_errors(tmp_path):
    with pytest.raises(DataIOError):
        load_edge_list(tmp_path / "missing.csv", 3)
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1\nzero,two\n")
    with pytest.raises(DataIOError):
        load_edge_list(bad, 3)
    wide = tmp_path / "wide.csv"
    wide.write_text("0,1,1\n1,2,1\n")
    with pytest.raises(DataIOError):
        load_edge_list(wide, 3)


def test_load_edge_list_skips_blank_lines(tmp_path):
    path = tmp_path / "edges.csv"
    path.write_text("\nsrc,dst\n\n0,1\n\n1,2\n")
    adj = load_edge_list(path, 3)
    np.testing.assert_array_equal(adj.edges(), [[0, 1], [1, 2]])


def test_load_edge_list_without_edges(tmp_path):
    path = tmp_path / "edges.csv"
    path.write_text("src,dst\n")
    assert load_edge_list(path, 3).matrix.nnz == 0
