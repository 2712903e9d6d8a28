"""
Post-MCMC estimation and evaluation.

- Dahl's least-squares selection of a single recorded draw
- LPML from Monte Carlo CPO estimates, and h selection by maximal LPML
- HPD intervals for node-level parameters
- One-step-ahead prediction and ReMSPE
- Parameter RMSE and the adjusted Rand index
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .errors import GagnarError, NumericalError, ValidationError
from .graph import AdjacencyMatrix, NetworkData
from .model import GroupParams, PanelData
from .sampler import ChainDraws, SamplerConfig, run_chain

logger = logging.getLogger(__name__)

DEFAULT_H_GRID = tuple(round(0.2 * k, 10) for k in range(26))


@dataclass
class FitResult:
    """
    Point estimate selected from a chain.

    Attributes:
        z_hat: zero-based labels of the selected draw
        K_hat: number of groups of the selected draw
        params_hat: group parameters of the selected draw
        m_b: zero-based index of the selected draw among the recorded draws
        iteration: sweep number of the selected draw
        lpml: LPML of the chain
        mean_comembership: average co-membership matrix over all draws
        h: smoothing scale of the chain
    """

    z_hat: np.ndarray
    K_hat: int
    params_hat: List[GroupParams]
    m_b: int
    iteration: int
    lpml: float
    mean_comembership: np.ndarray = field(repr=False)
    h: float = 0.0

    @property
    def theta_hat(self) -> np.ndarray:
        return np.vstack([p.theta for p in self.params_hat])

    @property
    def sigma2_hat(self) -> np.ndarray:
        return np.array([p.sigma2 for p in self.params_hat])

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.z_hat, minlength=self.K_hat)


def comembership(z: np.ndarray) -> np.ndarray:
    """b_ij = I(z_i = z_j)."""
    z = np.asarray(z)
    return (z[:, None] == z[None, :]).astype(np.float64)


def dahl_scores(draws: ChainDraws) -> Tuple[np.ndarray, np.ndarray]:
    """Squared Frobenius distance of every draw to the mean co-membership."""
    if draws.n_draws == 0:
        raise ValidationError("No recorded draws to select from")
    mean = np.zeros((draws.n_nodes, draws.n_nodes))
    for m in range(draws.n_draws):
        mean += comembership(draws.z[m])
    mean /= draws.n_draws
    scores = np.array(
        [np.sum((comembership(draws.z[m]) - mean) ** 2) for m in range(draws.n_draws)]
    )
    return scores, mean


def dahl_select(draws: ChainDraws) -> FitResult:
    """
    Pick the recorded draw whose co-membership is closest to the average.

    Ties go to the earliest draw.
    """
    scores, mean = dahl_scores(draws)
    m_b = int(np.argmin(scores))
    state = draws.state(m_b)
    logger.info(
        f"Dahl selection: draw {m_b} (sweep {int(draws.iterations[m_b])}), K={state.K}"
    )
    return FitResult(
        z_hat=state.z,
        K_hat=state.K,
        params_hat=state.params,
        m_b=m_b,
        iteration=int(draws.iterations[m_b]),
        lpml=lpml(draws),
        mean_comembership=mean,
        h=draws.h,
    )


def log_cpo(draws: ChainDraws) -> np.ndarray:
    """log CPO_i = -[logsumexp_m(-log L_i^(m)) - log M] for every node."""
    L = np.asarray(draws.loglik)
    if L.size == 0:
        raise ValidationError("No recorded log-likelihoods")
    if not np.all(np.isfinite(L)):
        bad = int(np.argwhere(~np.isfinite(L))[0, 1])
        raise NumericalError("Non-finite log-likelihood in draws", node=bad)
    return -(logsumexp(-L, axis=0) - np.log(L.shape[0]))


def lpml(draws: ChainDraws) -> float:
    """Log pseudo marginal likelihood: sum of log CPO over nodes."""
    return float(np.sum(log_cpo(draws)))


def posterior_k_distribution(draws: ChainDraws) -> Dict[int, float]:
    """Share of recorded draws with each number of groups."""
    values, counts = np.unique(draws.K, return_counts=True)
    return {int(k): float(c) / draws.n_draws for k, c in zip(values, counts)}


def modal_k(draws: ChainDraws) -> int:
    values, counts = np.unique(draws.K, return_counts=True)
    return int(values[np.argmax(counts)])


@dataclass
class HSelectionRow:
    h: float
    lpml: float
    modal_k: int
    k_hat: int


@dataclass
class HSelection:
    """Outcome of an LPML sweep over smoothing values."""

    h_best: float
    table: List[HSelectionRow]
    best_draws: ChainDraws = field(repr=False)
    best_fit: FitResult = field(repr=False)


def _resolve_workers(workers: Optional[int], n_tasks: int) -> int:
    if workers is None or workers < 1:
        workers = 1
    return max(1, min(workers, n_tasks))


def select_h(
    panel: PanelData,
    adj: AdjacencyMatrix,
    h_grid: Sequence[float],
    config: SamplerConfig,
    workers: Optional[int] = 1,
    on_chain_done=None,
) -> HSelection:
    """
    Run one chain per h and keep the one with the largest LPML.

    Every chain uses ``config`` with only ``h`` replaced, so all chains share
    the seed. Ties go to the smallest h.
    """
    grid = [float(h) for h in h_grid]
    if not grid:
        raise ValidationError("The h grid is empty")
    for h in grid:
        if not (np.isfinite(h) and h >= 0):
            raise ValidationError(f"Grid value h={h} must be >= 0")
    network = NetworkData.build(adj, grid[0], config.dense_threshold)

    def _run(h: float) -> Tuple[float, ChainDraws, FitResult]:
        chain_config = SamplerConfig(
            rng_seed=config.rng_seed,
            total_iters=config.total_iters,
            burn_in=config.burn_in,
            h=h,
            hyper=config.hyper,
            shuffle_order=config.shuffle_order,
            dense_threshold=config.dense_threshold,
        )
        try:
            draws = run_chain(chain_config, panel, adj, network=network.with_h(h))
            fit = dahl_select(draws)
        except NumericalError as exc:
            raise exc.with_context(h=h) from exc
        except GagnarError as exc:
            raise type(exc)(f"{exc} (h={h:g})") from exc
        if on_chain_done is not None:
            on_chain_done(h, fit)
        return h, draws, fit

    n_workers = _resolve_workers(workers, len(grid))
    if n_workers == 1:
        results = [_run(h) for h in grid]
    else:
        with ThreadPoolExecutor(max_workers=n_workers, thread_name_prefix="gagnar-h") as pool:
            results = list(pool.map(_run, grid))

    table = [
        HSelectionRow(h=h, lpml=fit.lpml, modal_k=modal_k(draws), k_hat=fit.K_hat)
        for h, draws, fit in results
    ]
    best = 0
    for idx, row in enumerate(table):
        if row.lpml > table[best].lpml or (
            row.lpml == table[best].lpml and row.h < table[best].h
        ):
            best = idx
    h_best, best_draws, best_fit = results[best]
    logger.info(f"Selected h={h_best:g} with LPML={table[best].lpml:.6g}")
    return HSelection(h_best=h_best, table=table, best_draws=best_draws, best_fit=best_fit)


def hpd_interval(samples: Sequence[float], mass: float = 0.95) -> Tuple[float, float]:
    """
    Shortest interval over the sorted samples holding ceil(mass * n) points.

    Ties go to the leftmost window.
    """
    values = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if values.size == 0:
        raise ValidationError("HPD interval needs samples")
    if values.size < 2:
        raise ValidationError("HPD interval needs at least two samples")
    if not 0 < mass < 1:
        raise ValidationError(f"HPD mass must be in (0, 1), got {mass}")
    n_in = min(values.size, max(1, math.ceil(mass * values.size - 1e-12)))
    widths = values[n_in - 1 :] - values[: values.size - n_in + 1]
    start = int(np.argmin(widths))
    return float(values[start]), float(values[start + n_in - 1])


def node_parameter_draws(draws: ChainDraws, node: int) -> np.ndarray:
    """
    Per-draw parameters of one node's group: columns theta..., sigma2.
    """
    if not 0 <= node < draws.n_nodes:
        raise ValidationError(f"Node {node} out of range")
    rows = []
    for m in range(draws.n_draws):
        k = draws.z[m, node]
        rows.append(np.append(draws.theta[m][k], draws.sigma2[m][k]))
    return np.vstack(rows)


def node_parameter_hpd(
    draws: ChainDraws, node: int, mass: float = 0.95
) -> List[Tuple[float, float]]:
    """HPD interval of every node-level parameter (theta components, then sigma2)."""
    values = node_parameter_draws(draws, node)
    return [hpd_interval(values[:, c], mass) for c in range(values.shape[1])]


def predict(
    fit: FitResult,
    panel: PanelData,
    row_norm_adj,
    start: int,
    stop: Optional[int] = None,
) -> np.ndarray:
    """
    One-step-ahead plug-in predictions for columns start..stop-1.

    Each prediction uses the observed previous column, never an earlier
    prediction.
    """
    stop = panel.n_times if stop is None else stop
    if not 1 <= start < stop <= panel.n_times:
        raise ValidationError(
            f"Test window [{start}, {stop}) must lie inside [1, {panel.n_times})"
        )
    if fit.z_hat.size != panel.n_nodes:
        raise ValidationError("Fit and panel have different node counts")
    theta = fit.theta_hat[fit.z_hat]
    lagged = panel.Y[:, start - 1 : stop - 1]
    network_lag = np.asarray(row_norm_adj @ lagged)
    pred = theta[:, [0]] + theta[:, [1]] * network_lag + theta[:, [2]] * lagged
    if panel.n_covariates:
        pred = pred + np.einsum("np,np->n", panel.V, theta[:, 3:])[:, None]
    return pred


def remspe(Y_test: np.ndarray, Y_hat: np.ndarray, Y_train: np.ndarray) -> float:
    """MSPE of the predictions relative to predicting each node's training mean."""
    Y_test = np.asarray(Y_test, dtype=np.float64)
    Y_hat = np.asarray(Y_hat, dtype=np.float64)
    Y_train = np.asarray(Y_train, dtype=np.float64)
    if Y_test.shape != Y_hat.shape:
        raise ValidationError(f"Shapes differ: {Y_test.shape} vs {Y_hat.shape}")
    if Y_train.ndim != 2 or Y_train.shape[0] != Y_test.shape[0]:
        raise ValidationError("Training block must have one row per node")
    mu = Y_train.mean(axis=1, keepdims=True)
    mspe = float(np.mean((Y_hat - Y_test) ** 2))
    mspe0 = float(np.mean((Y_test - mu) ** 2))
    if mspe0 == 0:
        raise ValidationError("Baseline MSPE is zero; ReMSPE is undefined")
    return mspe / mspe0


@dataclass(frozen=True)
class NodeParameters:
    """Node-aligned parameters: theta is (N, p+3), sigma2 is (N,)."""

    theta: np.ndarray
    sigma2: np.ndarray


def node_parameters(
    z: np.ndarray, theta: np.ndarray, sigma2: np.ndarray
) -> NodeParameters:
    """Give every node the parameters of its group."""
    z = np.asarray(z, dtype=np.int64)
    return NodeParameters(
        theta=np.asarray(theta, dtype=np.float64)[z],
        sigma2=np.asarray(sigma2, dtype=np.float64)[z],
    )


def rmse_params(
    estimates: Sequence[NodeParameters], truths: Sequence[NodeParameters]
) -> Dict[str, float]:
    """
    RMSE over replicates and nodes for beta_0, beta_1, beta_2, gamma and sigma2.

    gamma uses the squared Euclidean norm of the per-node error vector.
    """
    if len(estimates) != len(truths) or not estimates:
        raise ValidationError("Need one truth per estimate and at least one replicate")
    sq = {"beta0": 0.0, "beta1": 0.0, "beta2": 0.0, "gamma": 0.0, "sigma2": 0.0}
    count = 0
    for est, true in zip(estimates, truths):
        if est.theta.shape != true.theta.shape or est.sigma2.shape != true.sigma2.shape:
            raise ValidationError(
                f"Dimension mismatch: {est.theta.shape} vs {true.theta.shape}"
            )
        diff = est.theta - true.theta
        sq["beta0"] += float(np.sum(diff[:, 0] ** 2))
        sq["beta1"] += float(np.sum(diff[:, 1] ** 2))
        sq["beta2"] += float(np.sum(diff[:, 2] ** 2))
        sq["gamma"] += float(np.sum(diff[:, 3:] ** 2))
        sq["sigma2"] += float(np.sum((est.sigma2 - true.sigma2) ** 2))
        count += est.theta.shape[0]
    return {name: math.sqrt(total / count) for name, total in sq.items()}


def _pairs(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1.0) / 2.0


def adjusted_rand_index(z_hat: Sequence[int], z_true: Sequence[int]) -> float:
    """
    Hubert-Arabie adjusted Rand index from the contingency table.

    Two single-group (or two all-singleton) partitions score 1.
    """
    a = np.asarray(z_hat)
    b = np.asarray(z_true)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"Label vectors differ in length: {a.shape} vs {b.shape}")
    n = a.size
    _, a_idx = np.unique(a, return_inverse=True)
    _, b_idx = np.unique(b, return_inverse=True)
    table = np.zeros((a_idx.max() + 1, b_idx.max() + 1), dtype=np.int64)
    np.add.at(table, (a_idx, b_idx), 1)
    sum_cells = float(_pairs(table).sum())
    sum_rows = float(_pairs(table.sum(axis=1)).sum())
    sum_cols = float(_pairs(table.sum(axis=0)).sum())
    total = float(_pairs(n))
    if total == 0:
        return 1.0
    expected = sum_rows * sum_cols / total
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        return 1.0
    return (sum_cells - expected) / (maximum - expected)
