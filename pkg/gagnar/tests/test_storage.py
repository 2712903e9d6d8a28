import json

import numpy as np
import pytest

from gagnar.core.errors import DataIOError
from gagnar.core.graph import load_edge_list
from gagnar.core.posthoc import lpml
from gagnar.core.sampler import SamplerConfig, run_chain
from gagnar.core.storage import (
    DRAWS_FORMAT,
    DrawWriter,
    load_panel,
    read_draws,
    read_group_params,
    read_labels,
    read_summary,
    write_draws,
    write_edge_list,
    write_group_params,
    write_labels,
    write_matrix_csv,
    write_summary,
)

from .conftest import path_graph


@pytest.fixture
def short_chain(small_panel):
    return run_chain(SamplerConfig(rng_seed=4, total_iters=20, burn_in=5, h=0.4), small_panel, path_graph(4))


def test_draws_file_preserves_chain(tmp_path, short_chain):
    path = tmp_path / "draws.jsonl"
    write_draws(path, short_chain)
    loaded = read_draws(path)
    assert loaded.h == 0.4 and loaded.seed == 4
    np.testing.assert_array_equal(loaded.iterations, short_chain.iterations)
    np.testing.assert_array_equal(loaded.z, short_chain.z)
    np.testing.assert_array_equal(loaded.K, short_chain.K)
    np.testing.assert_array_equal(loaded.loglik, short_chain.loglik)
    for a, b in zip(loaded.theta, short_chain.theta):
        np.testing.assert_array_equal(a, b)
    assert lpml(loaded) == lpml(short_chain)


def test_draws_header_line(tmp_path, short_chain):
    path = tmp_path / "draws.jsonl"
    write_draws(path, short_chain)
    lines = path.read_text().splitlines()
    header = json.loads(lines[0])
    assert header["format"] == DRAWS_FORMAT
    assert header["n_nodes"] == 4
    assert len(lines) == short_chain.n_draws + 1
    record = json.loads(lines[1])
    assert set(record) == {"iteration", "K", "z", "theta", "sigma2", "loglik"}


def test_draw_writer_counts(tmp_path):
    with DrawWriter(tmp_path / "d.jsonl", h=0.0, seed=None, n_nodes=2) as writer:
        writer.write(1, [0, 0], np.zeros((1, 3)), [1.0], [-1.0, -2.0])
        writer.write(2, [0, 1], np.zeros((2, 3)), [1.0, 2.0], [-1.0, -2.0])
    assert writer.count == 2
    assert read_draws(tmp_path / "d.jsonl").K.tolist() == [1, 2]


def test_read_draws_rejects_bad_files(tmp_path):
    with pytest.raises(DataIOError):
        read_draws(tmp_path / "missing.jsonl")
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(DataIOError):
        read_draws(empty)
    foreign = tmp_path / "foreign.jsonl"
    foreign.write_text('{"format": "other", "version": 1}\n')
    with pytest.raises(DataIOError):
        read_draws(foreign)
    broken = tmp_path / "broken.jsonl"
    broken.write_text('{"format": "gagnar-draws", "version": 1, "n_nodes": 2}\n{not json\n')
    with pytest.raises(DataIOError):
        read_draws(broken)


def test_read_draws_checks_label_range(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"format": "gagnar-draws", "version": 1, "n_nodes": 2, "h": 0}\n'
        '{"iteration": 1, "K": 1, "z": [0, 1], "theta": [[0, 0, 0]], "sigma2": [1], "loglik": [0, 0]}\n'
    )
    with pytest.raises(DataIOError):
        read_draws(path)


def test_labels_are_one_based_on_disk(tmp_path):
    path = tmp_path / "labels.csv"
    write_labels(path, np.array([0, 1, 1, 0]))
    assert path.read_text().splitlines()[:2] == ["node,group", "1,1"]
    np.testing.assert_array_equal(read_labels(path), [0, 1, 1, 0])


def test_group_params_file(tmp_path):
    theta = np.array([[5.0, 0.2, 0.1, 0.5], [-5.0, -0.4, 0.2, 0.1]])
    sigma2 = np.array([2.0, 1.0])
    path = tmp_path / "truth_params.csv"
    write_group_params(path, theta, sigma2)
    assert path.read_text().splitlines()[0] == "group,sigma2,beta0,beta1,beta2,gamma1"
    loaded_theta, loaded_sigma2 = read_group_params(path)
    np.testing.assert_allclose(loaded_theta, theta)
    np.testing.assert_allclose(loaded_sigma2, sigma2)


def test_panel_files(tmp_path):
    Y = np.arange(8.0).reshape(2, 4)
    V = np.array([[0.5], [1.5]])
    write_matrix_csv(tmp_path / "Y.csv", Y)
    write_matrix_csv(tmp_path / "V.csv", V)
    panel = load_panel(tmp_path / "Y.csv", tmp_path / "V.csv")
    np.testing.assert_array_equal(panel.Y, Y)
    np.testing.assert_array_equal(panel.V, V)
    assert load_panel(tmp_path / "Y.csv").V.shape == (2, 0)


def test_panel_file_errors(tmp_path):
    with pytest.raises(DataIOError):
        load_panel(tmp_path / "missing.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,x\n")
    with pytest.raises(DataIOError):
        load_panel(bad)


def test_edge_list_file(tmp_path):
    adj = path_graph(3)
    write_edge_list(tmp_path / "edges.csv", adj, one_based=True)
    loaded = load_edge_list(tmp_path / "edges.csv", 3, one_based=True)
    np.testing.assert_array_equal(loaded.to_dense(), adj.to_dense())


def test_summary_file(tmp_path):
    write_summary(tmp_path / "out" / "summary.json", {"K_hat": 2, "h": 0.4})
    assert read_summary(tmp_path / "out" / "summary.json") == {"K_hat": 2, "h": 0.4}
    with pytest.raises(DataIOError):
        read_summary(tmp_path / "nothing.json")
