"""
Graph-dependent quantities for the grouped network autoregression.

This module turns an adjacency structure into everything the model and the
sampler read from the network:
- shortest-path distances on the symmetrized graph
- the graph-assisted CRP weight matrix for a smoothing scale h
- out-degrees and the row-normalized adjacency used by the regression design

All products are immutable after construction and may be shared between
chains running in parallel.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import DataIOError, ValidationError

logger = logging.getLogger(__name__)

UNREACHABLE = np.inf
DEFAULT_DENSE_THRESHOLD = 2000

MatrixLike = Union[np.ndarray, sparse.spmatrix]


@dataclass(frozen=True)
class AdjacencyMatrix:
    """
    Binary N x N adjacency with zero diagonal.

    Attributes:
        matrix: CSR matrix of 0/1 entries; a_ij = 1 means an edge i -> j
        n_nodes: Number of nodes N
    """

    matrix: sparse.csr_matrix
    n_nodes: int

    @classmethod
    def from_array(cls, array: MatrixLike) -> "AdjacencyMatrix":
        """Validate a dense or sparse 0/1 matrix and wrap it."""
        mat = sparse.csr_matrix(array, dtype=np.float64)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError(f"Adjacency must be square, got shape {mat.shape}")
        if mat.shape[0] < 1:
            raise ValidationError("Adjacency must have at least one node")
        mat.eliminate_zeros()
        if mat.nnz and not np.all(mat.data == 1.0):
            raise ValidationError("Adjacency entries must be 0 or 1")
        if np.any(mat.diagonal() != 0):
            raise ValidationError("Adjacency must have a zero diagonal (no self-loops)")
        mat.sort_indices()
        return cls(matrix=mat, n_nodes=mat.shape[0])

    @classmethod
    def from_edges(
        cls, edges: Iterable[Tuple[int, int]], n_nodes: int
    ) -> "AdjacencyMatrix":
        """Build from zero-based (src, dst) pairs; duplicates collapse to one edge."""
        if n_nodes < 1:
            raise ValidationError("Number of nodes must be positive")
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n_nodes:
                raise ValidationError(
                    f"Edge endpoint out of range for {n_nodes} nodes"
                )
            loops = pairs[:, 0] == pairs[:, 1]
            if np.any(loops):
                node = int(pairs[loops][0, 0])
                raise ValidationError(f"Self-loop on node {node} is not allowed")
            pairs = np.unique(pairs, axis=0)
        mat = sparse.csr_matrix(
            (np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
            shape=(n_nodes, n_nodes),
        )
        return cls.from_array(mat)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def out_degrees(self) -> np.ndarray:
        """n_i = sum_j a_ij."""
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def symmetrized(self) -> sparse.csr_matrix:
        """Edge present if a_ij = 1 or a_ji = 1."""
        sym = self.matrix.maximum(self.matrix.T).tocsr()
        sym.sort_indices()
        return sym

    def edges(self) -> np.ndarray:
        """Zero-based (src, dst) pairs in row-major order."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.column_stack([coo.row[order], coo.col[order]]).astype(np.int64)


@dataclass(frozen=True)
class DistanceMatrix:
    """Unweighted shortest-path lengths; unreachable pairs hold ``UNREACHABLE``."""

    values: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    def reachable(self) -> np.ndarray:
        return np.isfinite(self.values)


@dataclass(frozen=True)
class WeightMatrix:
    """
    gaCRP weights w_ij for a smoothing scale h.

    Stored dense up to a size threshold and as CSR above it. The diagonal
    follows the d_ii = 0 case of the formula but is never read: the sampler
    always masks node i out of its own sums.
    """

    values: MatrixLike
    h: float

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.values)

    def row(self, i: int) -> np.ndarray:
        """Dense copy of row i."""
        if self.is_sparse:
            return self.values.getrow(i).toarray().ravel()
        return np.array(self.values[i], dtype=np.float64)

    def to_dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.values.toarray()
        return np.array(self.values, dtype=np.float64)

    def off_diagonal_row_sums(self) -> np.ndarray:
        dense = self.to_dense()
        return dense.sum(axis=1) - np.diag(dense)


def shortest_path_distances(adj: AdjacencyMatrix) -> DistanceMatrix:
    """
    All-pairs unweighted shortest paths on the symmetrized graph.

    Args:
        adj: Validated adjacency matrix

    Returns:
        DistanceMatrix with d_ii = 0 and ``UNREACHABLE`` across components.
    """
    sym = adj.symmetrized()
    if sym.nnz == 0:
        values = np.full((adj.n_nodes, adj.n_nodes), UNREACHABLE)
        np.fill_diagonal(values, 0.0)
        return DistanceMatrix(values=values)
    # Breadth-first distances with unit edge lengths from every source.
    values = csgraph.shortest_path(sym, method="D", directed=False, unweighted=True)
    n_unreachable = int(np.count_nonzero(np.isinf(values)))
    if n_unreachable:
        logger.info(f"Graph is disconnected: {n_unreachable} unreachable ordered pairs")
    return DistanceMatrix(values=values)


def build_weights(
    dist: DistanceMatrix,
    h: float,
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
) -> WeightMatrix:
    """
    gaCRP weight matrix.

    w_ij = 1 when d_ij <= 1, exp(-d_ij * h) when d_ij > 1 is finite and 0
    for unreachable pairs regardless of h.

    Args:
        dist: Shortest-path distances
        h: Smoothing scale, must be non-negative
        dense_threshold: Largest N stored as a dense array

    Returns:
        WeightMatrix
    """
    if not np.isfinite(h) or h < 0:
        raise ValidationError(f"Smoothing parameter h must be >= 0, got {h}")
    d = dist.values
    reachable = np.isfinite(d)
    values = np.zeros_like(d, dtype=np.float64)
    far = reachable & (d > 1)
    values[reachable & (d <= 1)] = 1.0
    values[far] = np.exp(-d[far] * h)
    if dist.n_nodes > dense_threshold:
        return WeightMatrix(values=sparse.csr_matrix(values), h=float(h))
    return WeightMatrix(values=values, h=float(h))


def row_normalized_adjacency(adj: AdjacencyMatrix) -> sparse.csr_matrix:
    """
    Entry (i, j) = a_ij / n_i, with an all-zero row for isolated nodes.
    """
    degrees = adj.out_degrees()
    inv = np.zeros_like(degrees, dtype=np.float64)
    nonzero = degrees > 0
    inv[nonzero] = 1.0 / degrees[nonzero]
    isolated = int(np.count_nonzero(~nonzero))
    if isolated:
        logger.warning(
            f"{isolated} node(s) have no out-edges; their network regressor is zero"
        )
    return sparse.diags(inv).dot(adj.matrix).tocsr()


@dataclass(frozen=True)
class NetworkData:
    """
    Everything graph-derived that a chain needs, bundled for sharing.

    Attributes:
        adjacency: Directed adjacency used by the regression term
        distances: Symmetrized shortest-path distances
        weights: gaCRP weights at smoothing scale ``weights.h``
        degrees: Out-degrees n_i
        row_norm: Row-normalized adjacency W
    """

    adjacency: AdjacencyMatrix
    distances: DistanceMatrix
    weights: WeightMatrix
    degrees: np.ndarray
    row_norm: sparse.csr_matrix = field(repr=False)
    dense_threshold: int = DEFAULT_DENSE_THRESHOLD

    @classmethod
    def build(
        cls,
        adj: AdjacencyMatrix,
        h: float = 0.0,
        dense_threshold: int = DEFAULT_DENSE_THRESHOLD,
        distances: Optional[DistanceMatrix] = None,
    ) -> "NetworkData":
        dist = distances if distances is not None else shortest_path_distances(adj)
        return cls(
            adjacency=adj,
            distances=dist,
            weights=build_weights(dist, h, dense_threshold),
            degrees=adj.out_degrees(),
            row_norm=row_normalized_adjacency(adj),
            dense_threshold=dense_threshold,
        )

    @property
    def n_nodes(self) -> int:
        return self.adjacency.n_nodes

    @property
    def h(self) -> float:
        return self.weights.h

    def with_h(self, h: float) -> "NetworkData":
        """Same graph, weights rebuilt for another smoothing scale."""
        return NetworkData(
            adjacency=self.adjacency,
            distances=self.distances,
            weights=build_weights(self.distances, h, self.dense_threshold),
            degrees=self.degrees,
            row_norm=self.row_norm,
            dense_threshold=self.dense_threshold,
        )


def _edge_list_layout(handle) -> Tuple[int, bool]:
    """(lines to skip for a header, whether any edge rows follow)."""
    records = ((n, line) for n, line in enumerate(handle, 1) if line.strip())
    first = next(records, None)
    if first is None:
        return 0, False
    lineno, line = first
    try:
        [int(part) for part in line.split(",")]
    except ValueError:
        return lineno, next(records, None) is not None
    return 0, True


def load_edge_list(
    path: Union[str, Path], n_nodes: int, one_based: bool = False
) -> AdjacencyMatrix:
    """
    Read a ``src,dst`` CSV edge list into an adjacency matrix.

    A first record that does not parse as integers is treated as a header.
    Blank lines are skipped. Duplicate edges collapse; self-loops and
    out-of-range ids raise ValidationError.
    """
    path = Path(path)
    try:
        with open(path) as handle:
            skip, has_edges = _edge_list_layout(handle)
        if has_edges:
            edges = np.loadtxt(path, delimiter=",", dtype=np.int64, skiprows=skip, ndmin=2)
        else:
            edges = np.zeros((0, 2), dtype=np.int64)
    except OSError as exc:
        raise DataIOError(f"Cannot read edge list {path}: {exc}") from exc
    except ValueError as exc:
        raise DataIOError(f"Malformed edge list {path}: {exc}") from exc
    if edges.shape[1] != 2:
        raise DataIOError(f"Edge list {path} needs exactly two columns, found {edges.shape[1]}")

    if one_based:
        edges = edges - 1
    logger.debug(f"Read {len(edges)} edges from {path}")
    return AdjacencyMatrix.from_edges(edges, n_nodes)
