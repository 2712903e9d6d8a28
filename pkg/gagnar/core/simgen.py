"""
Synthetic data generation for simulation studies.

Scenario files are INI documents:

    [scenario]
    name = example1_scenario1
    network = sbm            ; sbm | lattice | shareholder | edges
    n_nodes = 100
    n_times = 20
    replicates = 100
    seed = 1
    p_in = 0.2               ; sbm only, default 20/N
    p_out = 0.02             ; sbm only, default 2/N

    [group.1]
    sigma2 = 2.0
    beta0 = 5.0
    beta1 = 0.2
    beta2 = 0.1
    gamma = 0.5, 0.7, 1.0

Graphs other than the SBM are fixed across replicates and labelled with
k-means on adjacency rows; SBM graphs and labels are redrawn per replicate.
"""

import configparser
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.cluster.vq import ClusterError, kmeans2

from .errors import DataIOError, NumericalError, ValidationError
from .graph import AdjacencyMatrix, load_edge_list, row_normalized_adjacency
from .model import PanelData

logger = logging.getLogger(__name__)

NETWORK_KINDS = ("sbm", "lattice", "shareholder", "edges")
SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
KMEANS_ATTEMPTS = 20


@dataclass(frozen=True)
class GroupTruth:
    """True parameters of one group; sigma2 may be 0 for noise-free data."""

    sigma2: float
    beta0: float
    beta1: float
    beta2: float
    gamma: Tuple[float, ...] = ()

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 >= 0):
            raise ValidationError(f"sigma2 must be >= 0, got {self.sigma2}")
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))

    @property
    def theta(self) -> np.ndarray:
        return np.array([self.beta0, self.beta1, self.beta2, *self.gamma])


@dataclass(frozen=True)
class ScenarioSpec:
    """A simulation design: groups, network generator and sizes."""

    groups: Tuple[GroupTruth, ...]
    n_nodes: int = 100
    n_times: int = 20
    replicates: int = 1
    seed: Optional[int] = None
    network: str = "sbm"
    name: str = "scenario"
    p_in: Optional[float] = None
    p_out: Optional[float] = None
    diagonal_prob: float = 0.25
    n_holders: int = 60
    edges_path: Optional[str] = None
    include_initial: bool = False

    def __post_init__(self):
        if len(self.groups) < 1:
            raise ValidationError("A scenario needs at least one group")
        p = len(self.groups[0].gamma)
        if any(len(g.gamma) != p for g in self.groups):
            raise ValidationError("All groups must have the same number of gamma entries")
        if self.n_nodes < 1 or self.n_times < 2 or self.replicates < 1:
            raise ValidationError("n_nodes >= 1, n_times >= 2 and replicates >= 1 required")
        if self.network not in NETWORK_KINDS:
            raise ValidationError(
                f"Unknown network '{self.network}', expected one of {NETWORK_KINDS}"
            )
        if self.network == "edges" and not self.edges_path:
            raise ValidationError("network = edges requires an edges path")

    @property
    def K(self) -> int:
        return len(self.groups)

    @property
    def n_covariates(self) -> int:
        return len(self.groups[0].gamma)

    @property
    def sbm_probabilities(self) -> Tuple[float, float]:
        p_in = 20.0 / self.n_nodes if self.p_in is None else self.p_in
        p_out = 2.0 / self.n_nodes if self.p_out is None else self.p_out
        return min(p_in, 1.0), min(p_out, 1.0)

    def theta_matrix(self) -> np.ndarray:
        return np.vstack([g.theta for g in self.groups])

    def sigma2_vector(self) -> np.ndarray:
        return np.array([g.sigma2 for g in self.groups])


@dataclass
class SimulatedDataset:
    """One replicate: graph, true labels (zero-based) and panel."""

    adjacency: AdjacencyMatrix
    labels: np.ndarray
    panel: PanelData
    replicate: int = 0


def _parse_floats(text: str) -> Tuple[float, ...]:
    parts = [p.strip() for p in text.replace(";", ",").split(",")]
    return tuple(float(p) for p in parts if p)


def load_scenario(path: Union[str, Path]) -> ScenarioSpec:
    """Read a scenario INI file."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as handle:
            parser.read_file(handle)
    except OSError as exc:
        raise DataIOError(f"Cannot read scenario file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise DataIOError(f"Malformed scenario file {path}: {exc}") from exc
    if not parser.has_section("scenario"):
        raise ValidationError(f"{path} has no [scenario] section")

    group_sections = sorted(
        (s for s in parser.sections() if s.startswith("group.")),
        key=lambda s: int(s.split(".", 1)[1]),
    )
    try:
        groups = tuple(
            GroupTruth(
                sigma2=parser.getfloat(s, "sigma2"),
                beta0=parser.getfloat(s, "beta0"),
                beta1=parser.getfloat(s, "beta1"),
                beta2=parser.getfloat(s, "beta2"),
                gamma=_parse_floats(parser.get(s, "gamma", fallback="")),
            )
            for s in group_sections
        )
        sc = parser["scenario"]
        edges = sc.get("edges")
        if edges and not Path(edges).is_absolute():
            edges = str(path.parent / edges)
        return ScenarioSpec(
            groups=groups,
            n_nodes=sc.getint("n_nodes", 100),
            n_times=sc.getint("n_times", 20),
            replicates=sc.getint("replicates", 1),
            seed=sc.getint("seed") if "seed" in sc else None,
            network=sc.get("network", "sbm").strip().lower(),
            name=sc.get("name", path.stem),
            p_in=sc.getfloat("p_in") if "p_in" in sc else None,
            p_out=sc.getfloat("p_out") if "p_out" in sc else None,
            diagonal_prob=sc.getfloat("diagonal_prob", 0.25),
            n_holders=sc.getint("n_holders", 60),
            edges_path=edges,
            include_initial=sc.getboolean("include_initial", False),
        )
    except (ValueError, configparser.Error) as exc:
        raise ValidationError(f"Invalid value in {path}: {exc}") from exc


def generate_sbm(
    N: int,
    K: int,
    p_in: Optional[float],
    p_out: Optional[float],
    rng: np.random.Generator,
) -> Tuple[AdjacencyMatrix, np.ndarray]:
    """
    Undirected stochastic block model with uniform group labels.

    Defaults: p_in = 20/N, p_out = 2/N.

    Returns:
        (adjacency, zero-based labels)
    """
    if N < 1 or K < 1:
        raise ValidationError("N and K must be positive")
    p_in = 20.0 / N if p_in is None else p_in
    p_out = 2.0 / N if p_out is None else p_out
    for name, value in (("p_in", p_in), ("p_out", p_out)):
        if not 0.0 <= value <= 1.0:
            raise ValidationError(f"{name} must be a probability, got {value}")
    labels = rng.integers(K, size=N)
    same = labels[:, None] == labels[None, :]
    probs = np.where(same, p_in, p_out)
    draws = rng.random((N, N)) < probs
    upper = np.triu(draws, k=1)
    adj = (upper | upper.T).astype(np.float64)
    return AdjacencyMatrix.from_array(adj), labels.astype(np.int64)


def generate_city_lattice(
    n_nodes: int, rng: np.random.Generator, diagonal_prob: float = 0.25
) -> AdjacencyMatrix:
    """
    Planar border-sharing surrogate: a near-square grid filled row by row,
    with grid-neighbour edges and random diagonal borders.
    """
    if not 0.0 <= diagonal_prob <= 1.0:
        raise ValidationError(f"diagonal_prob must be a probability, got {diagonal_prob}")
    cols = max(1, math.ceil(math.sqrt(n_nodes)))
    edges = []
    for i in range(n_nodes):
        r, c = divmod(i, cols)
        right = i + 1
        down = i + cols
        if c + 1 < cols and right < n_nodes:
            edges.append((i, right))
        if down < n_nodes:
            edges.append((i, down))
        diag = down + 1
        if c + 1 < cols and diag < n_nodes and rng.random() < diagonal_prob:
            edges.append((i, diag))
    edges += [(j, i) for i, j in edges]
    return AdjacencyMatrix.from_edges(edges, n_nodes)


def generate_shareholder_graph(
    n_nodes: int, n_holders: int, rng: np.random.Generator
) -> AdjacencyMatrix:
    """
    Common-shareholder surrogate: every node draws two distinct top holders
    from a Zipf-like pool; nodes sharing a holder are linked.
    """
    if n_holders < 2:
        raise ValidationError("Need at least two shareholders")
    popularity = 1.0 / np.arange(1, n_holders + 1)
    popularity /= popularity.sum()
    incidence = np.zeros((n_nodes, n_holders))
    for i in range(n_nodes):
        incidence[i, rng.choice(n_holders, size=2, replace=False, p=popularity)] = 1.0
    shared = (incidence @ incidence.T) > 0
    np.fill_diagonal(shared, False)
    return AdjacencyMatrix.from_array(shared.astype(np.float64))


def kmeans_labels(adj: AdjacencyMatrix, K: int, rng: np.random.Generator) -> np.ndarray:
    """k-means on adjacency rows, relabelled by first appearance."""
    if K < 1:
        raise ValidationError("K must be positive")
    rows = adj.to_dense()
    if K == 1:
        return np.zeros(adj.n_nodes, dtype=np.int64)
    for attempt in range(1, KMEANS_ATTEMPTS + 1):
        try:
            _, raw = kmeans2(rows, K, minit="++", seed=rng, missing="raise")
        except ClusterError:
            raw = None
        if raw is not None and np.unique(raw).size == K:
            break
        logger.debug(f"k-means attempt {attempt} left a cluster empty, restarting")
    else:
        raise NumericalError(f"k-means could not find {K} non-empty clusters in {KMEANS_ATTEMPTS} attempts")
    _, first = np.unique(raw, return_index=True)
    order = np.unique(raw)[np.argsort(first)]
    remap = {int(old): new for new, old in enumerate(order)}
    return np.array([remap[int(r)] for r in raw], dtype=np.int64)


def simulate_panel(
    spec: ScenarioSpec,
    adj: AdjacencyMatrix,
    labels: np.ndarray,
    rng: np.random.Generator,
) -> PanelData:
    """
    Run the grouped network autoregression forward from Y_0 = 0.

    Covariates V_i ~ N(0, I_p) are drawn once per node; noise is
    N(0, sigma2_{z_i}).
    """
    labels = np.asarray(labels, dtype=np.int64)
    N = adj.n_nodes
    if labels.shape != (N,):
        raise ValidationError(f"Need {N} labels, got {labels.shape}")
    if labels.min() < 0 or labels.max() >= spec.K:
        raise ValidationError(f"Labels must lie in 0..{spec.K - 1}")
    theta = spec.theta_matrix()[labels]
    noise_sd = np.sqrt(spec.sigma2_vector()[labels])
    V = rng.standard_normal((N, spec.n_covariates))
    static = theta[:, 0] + np.einsum("np,np->n", V, theta[:, 3:])
    W = row_normalized_adjacency(adj)

    columns = []
    previous = np.zeros(N)
    if spec.include_initial:
        columns.append(previous)
    for _ in range(spec.n_times):
        current = (
            static
            + theta[:, 1] * (W @ previous)
            + theta[:, 2] * previous
            + noise_sd * rng.standard_normal(N)
        )
        columns.append(current)
        previous = current
    return PanelData(Y=np.column_stack(columns), V=V)


def _fixed_graph(spec: ScenarioSpec, rng: np.random.Generator) -> Tuple[AdjacencyMatrix, np.ndarray]:
    if spec.network == "lattice":
        adj = generate_city_lattice(spec.n_nodes, rng, spec.diagonal_prob)
    elif spec.network == "shareholder":
        adj = generate_shareholder_graph(spec.n_nodes, spec.n_holders, rng)
    else:
        adj = load_edge_list(spec.edges_path, spec.n_nodes)
    return adj, kmeans_labels(adj, spec.K, rng)


def simulate_replicates(
    spec: ScenarioSpec, workers: Optional[int] = 1
) -> List[SimulatedDataset]:
    """
    Generate ``spec.replicates`` datasets from independent child streams.

    Each replicate depends only on (seed, replicate index).
    """
    if spec.seed is None:
        raise ValidationError(f"Scenario '{spec.name}' needs a seed")
    root = np.random.SeedSequence(int(spec.seed))
    graph_seq, *children = root.spawn(spec.replicates + 1)

    fixed: Optional[Tuple[AdjacencyMatrix, np.ndarray]] = None
    if spec.network != "sbm":
        fixed = _fixed_graph(spec, np.random.default_rng(graph_seq))

    def _one(index: int) -> SimulatedDataset:
        rng = np.random.default_rng(children[index])
        if fixed is None:
            p_in, p_out = spec.sbm_probabilities
            adj, labels = generate_sbm(spec.n_nodes, spec.K, p_in, p_out, rng)
        else:
            adj, labels = fixed
        panel = simulate_panel(spec, adj, labels, rng)
        return SimulatedDataset(adjacency=adj, labels=labels, panel=panel, replicate=index)

    n_workers = max(1, min(workers or 1, spec.replicates))
    if n_workers == 1:
        return [_one(r) for r in range(spec.replicates)]
    with ThreadPoolExecutor(max_workers=n_workers, thread_name_prefix="gagnar-sim") as pool:
        return list(pool.map(_one, range(spec.replicates)))


def shipped_scenarios() -> List[str]:
    """Names of the scenario files bundled with the package."""
    return sorted(p.stem for p in SCENARIO_DIR.glob("*.ini"))


def find_scenario(name_or_path: Union[str, Path]) -> Path:
    """Resolve a file path or the name of a bundled scenario."""
    candidate = Path(name_or_path)
    if candidate.is_file():
        return candidate
    bundled = SCENARIO_DIR / f"{candidate.stem}.ini"
    if bundled.is_file():
        return bundled
    raise DataIOError(
        f"Scenario '{name_or_path}' not found; bundled: {', '.join(shipped_scenarios())}"
    )
