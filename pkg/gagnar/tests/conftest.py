import os

import numpy as np
import pytest

from gagnar.core.graph import AdjacencyMatrix
from gagnar.core.model import NIGHyper, PanelData
from gagnar.core.simgen import GroupTruth, ScenarioSpec, simulate_panel


def pytest_collection_modifyitems(config, items):
    if os.environ.get("GAGNAR_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set GAGNAR_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def path_graph(n):
    """Undirected path 0 - 1 - ... - n-1."""
    edges = [(i, i + 1) for i in range(n - 1)]
    edges += [(j, i) for i, j in edges]
    return AdjacencyMatrix.from_edges(edges, n)


def complete_graph(n):
    dense = np.ones((n, n)) - np.eye(n)
    return AdjacencyMatrix.from_array(dense)


def two_group_spec(n_nodes=30, n_times=12, seed=5, replicates=1):
    return ScenarioSpec(
        groups=(
            GroupTruth(sigma2=0.5, beta0=5.0, beta1=0.2, beta2=0.1),
            GroupTruth(sigma2=0.5, beta0=-5.0, beta1=-0.2, beta2=0.3),
        ),
        n_nodes=n_nodes,
        n_times=n_times,
        replicates=replicates,
        seed=seed,
    )


def block_graph(labels):
    """Complete graph inside each label block, nothing across."""
    labels = np.asarray(labels)
    dense = (labels[:, None] == labels[None, :]).astype(float)
    np.fill_diagonal(dense, 0.0)
    return AdjacencyMatrix.from_array(dense)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_panel(rng):
    """N = 4, T = 4, no covariates."""
    return PanelData.without_covariates(rng.normal(size=(4, 4)))


@pytest.fixture
def two_group_data():
    """Two well separated groups on a block graph: (panel, adjacency, labels)."""
    spec = two_group_spec()
    labels = np.repeat([0, 1], spec.n_nodes // 2)
    adj = block_graph(labels)
    panel = simulate_panel(spec, adj, labels, np.random.default_rng(spec.seed))
    return panel, adj, labels


@pytest.fixture
def vague_prior():
    return NIGHyper.default(3)
