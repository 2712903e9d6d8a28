"""
Collapsed Gibbs sampler for the graph-assisted grouped network autoregression.

One sweep visits every node, removes it from its group, and re-allocates it
with probability proportional to

    kappa_k * f(Y_(i) | theta_k, sigma_k^2)   for an existing group k
    alpha   * g(Y_(i))                         for a new group

where kappa_k sums the gaCRP weights from node i to the members of group k.
After the membership loop every group's (theta, sigma^2) is redrawn from its
NIG full conditional.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from .errors import NumericalError, ValidationError
from .graph import AdjacencyMatrix, NetworkData, WeightMatrix
from .model import (
    DesignCache,
    GroupParams,
    NIGHyper,
    NIGPosterior,
    PanelData,
    build_design_cache,
    cholesky_with_jitter,
    gacrp_log_prior,
    log_marginal_from_stats,
    posterior_from_stats,
)

logger = logging.getLogger(__name__)

DEFAULT_TOTAL_ITERS = 1500
DEFAULT_BURN_IN = 500


@dataclass
class ChainState:
    """
    Current memberships and group parameters.

    Labels are zero-based, contiguous and ordered by first appearance over
    the node order. ``theta`` is K x (p+3) and ``sigma2`` has length K.
    """

    z: np.ndarray
    theta: np.ndarray
    sigma2: np.ndarray

    @property
    def K(self) -> int:
        return self.theta.shape[0]

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.z, minlength=self.K)

    @property
    def params(self) -> List[GroupParams]:
        return [GroupParams(self.theta[k], float(self.sigma2[k])) for k in range(self.K)]

    def copy(self) -> "ChainState":
        return ChainState(self.z.copy(), self.theta.copy(), self.sigma2.copy())

    def check(self) -> None:
        """Raise if labels are not compact or sizes are inconsistent."""
        if self.z.min() != 0 or self.z.max() != self.K - 1:
            raise ValidationError("Chain labels are not contiguous")
        if np.any(self.group_sizes == 0):
            raise ValidationError("Chain holds an empty group")
        if self.sigma2.shape[0] != self.K:
            raise ValidationError("Parameter count does not match group count")


@dataclass
class ChainDraws:
    """
    Post-burn-in record of one chain.

    Attributes:
        iterations: 1-based sweep numbers of the recorded draws
        z: (M, N) zero-based labels
        K: (M,) group counts
        theta: per draw, a K^(m) x (p+3) array
        sigma2: per draw, a length-K^(m) array
        loglik: (M, N) per-node log-likelihood under the node's own group
        h: smoothing scale the chain ran with
        seed: RNG seed of the chain
    """

    iterations: np.ndarray
    z: np.ndarray
    K: np.ndarray
    theta: List[np.ndarray]
    sigma2: List[np.ndarray]
    loglik: np.ndarray
    h: float = 0.0
    seed: Optional[int] = None

    @property
    def n_draws(self) -> int:
        return self.z.shape[0]

    @property
    def n_nodes(self) -> int:
        return self.z.shape[1]

    def state(self, m: int) -> ChainState:
        return ChainState(self.z[m].copy(), self.theta[m].copy(), self.sigma2[m].copy())


@dataclass(frozen=True)
class SamplerConfig:
    """
    Settings of one chain.

    ``hyper`` defaults to the noninformative NIG prior sized to the panel.
    """

    rng_seed: int
    total_iters: int = DEFAULT_TOTAL_ITERS
    burn_in: int = DEFAULT_BURN_IN
    h: float = 0.0
    hyper: Optional[NIGHyper] = None
    shuffle_order: bool = False
    dense_threshold: int = 2000

    def __post_init__(self):
        if self.rng_seed is None or int(self.rng_seed) < 0:
            raise ValidationError("A non-negative integer rng_seed is required")
        if self.total_iters < 1:
            raise ValidationError("total_iters must be positive")
        if not 0 <= self.burn_in < self.total_iters:
            raise ValidationError(
                f"burn_in must satisfy 0 <= burn_in < total_iters, "
                f"got {self.burn_in} and {self.total_iters}"
            )
        if not (np.isfinite(self.h) and self.h >= 0):
            raise ValidationError(f"h must be >= 0, got {self.h}")

    @property
    def n_recorded(self) -> int:
        return self.total_iters - self.burn_in

    def resolve_hyper(self, n_regressors: int) -> NIGHyper:
        if self.hyper is None:
            return NIGHyper.default(n_regressors)
        if self.hyper.dim != n_regressors:
            raise ValidationError(
                f"Prior dimension {self.hyper.dim} does not match {n_regressors} regressors"
            )
        return self.hyper


def sample_nig(post: NIGPosterior, rng: np.random.Generator) -> GroupParams:
    """
    Draw sigma^2 ~ IG(a, b), then theta | sigma^2 ~ N(tau, sigma^2 Sigma).
    """
    sigma2 = post.b / rng.gamma(post.a)
    factor = cholesky_with_jitter(post.Sigma, "posterior covariance")
    theta = post.tau + np.sqrt(sigma2) * (factor @ rng.standard_normal(post.tau.size))
    return GroupParams(theta=theta, sigma2=float(sigma2))


def canonicalize(
    z: np.ndarray, theta: np.ndarray, sigma2: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Relabel groups by first appearance and drop groups without members.

    Entries of ``z`` equal to -1 (a node currently removed) are ignored and
    kept as -1.
    """
    present = z >= 0
    labels, first = np.unique(z[present], return_index=True)
    order = labels[np.argsort(first, kind="stable")]
    remap = np.full(theta.shape[0], -1, dtype=np.int64)
    remap[order] = np.arange(order.size)
    relabelled = z.copy()
    relabelled[present] = remap[z[present]]
    return relabelled, theta[order].copy(), sigma2[order].copy()


def group_stickiness(i: int, z: np.ndarray, weights: WeightMatrix, K: int) -> np.ndarray:
    """
    kappa_k = sum_{j != i} w_ij I(z_j = k) for k < K.

    Node i must already be removed (z[i] == -1).
    """
    row = weights.row(i)
    others = z >= 0
    others[i] = False
    return np.bincount(z[others], weights=row[others], minlength=K)


def membership_log_weights(
    i: int,
    state: ChainState,
    weights: WeightMatrix,
    cache: DesignCache,
    hyper: NIGHyper,
) -> np.ndarray:
    """Unnormalized log-probabilities over the K' existing groups plus a new one."""
    kappa = group_stickiness(i, state.z, weights, state.K)
    log_w = np.full(state.K + 1, -np.inf)
    if state.K:
        loglik = cache.node_log_likelihoods(i, state.theta, state.sigma2)
        positive = kappa > 0
        log_w[:-1][positive] = np.log(kappa[positive]) + loglik[positive]
    log_w[-1] = np.log(hyper.alpha) + cache.log_g[i]
    return log_w


def membership_conditional(
    i: int,
    state: ChainState,
    weights: WeightMatrix,
    cache: DesignCache,
    hyper: NIGHyper,
) -> np.ndarray:
    """
    Full conditional of z_i given everything else, as a probability vector.

    The last entry is the probability of opening a new group. Node i must
    already be removed from ``state`` (``state.z[i] == -1``).
    """
    if state.z[i] != -1:
        raise ValidationError(f"Node {i} must be removed before computing its conditional")
    log_w = membership_log_weights(i, state, weights, cache, hyper)
    norm = logsumexp(log_w)
    if not np.isfinite(norm):
        raise NumericalError("Membership conditional has no positive mass", node=i)
    return np.exp(log_w - norm)


def _draw_category(probs: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(probs)
    u = rng.random() * cumulative[-1]
    return int(min(np.searchsorted(cumulative, u, side="right"), probs.size - 1))


def _remove_node(state: ChainState, i: int) -> ChainState:
    old = state.z[i]
    state.z[i] = -1
    if not np.any(state.z == old):
        z, theta, sigma2 = canonicalize(state.z, state.theta, state.sigma2)
        return ChainState(z, theta, sigma2)
    return state


def refresh_parameters(
    state: ChainState,
    cache: DesignCache,
    hyper: NIGHyper,
    rng: np.random.Generator,
) -> ChainState:
    """Draw every group's (theta, sigma^2) from its NIG full conditional."""
    theta = np.empty_like(state.theta)
    sigma2 = np.empty_like(state.sigma2)
    for k in range(state.K):
        members = np.flatnonzero(state.z == k)
        try:
            params = sample_nig(posterior_from_stats(cache.stats(members), hyper), rng)
        except NumericalError as exc:
            raise exc.with_context(group=k) from exc
        theta[k] = params.theta
        sigma2[k] = params.sigma2
    return ChainState(state.z.copy(), theta, sigma2)


def gibbs_sweep(
    state: ChainState,
    cache: DesignCache,
    weights: WeightMatrix,
    hyper: NIGHyper,
    rng: np.random.Generator,
    order: Optional[np.ndarray] = None,
) -> ChainState:
    """
    One full pass of membership updates followed by a parameter refresh.

    A freshly opened group immediately receives parameters drawn from the
    single-node NIG posterior so later nodes in the same pass can join it.
    """
    current = state.copy()
    visit = np.arange(cache.n_nodes) if order is None else order
    for i in visit:
        i = int(i)
        current = _remove_node(current, i)
        probs = membership_conditional(i, current, weights, cache, hyper)
        k = _draw_category(probs, rng)
        if k == current.K:
            try:
                post = posterior_from_stats(cache.stats(np.array([i])), hyper)
                fresh = sample_nig(post, rng)
            except NumericalError as exc:
                raise exc.with_context(node=i) from exc
            current = ChainState(
                current.z,
                np.vstack([current.theta, fresh.theta[None, :]]),
                np.append(current.sigma2, fresh.sigma2),
            )
        current.z[i] = k
    z, theta, sigma2 = canonicalize(current.z, current.theta, current.sigma2)
    return refresh_parameters(ChainState(z, theta, sigma2), cache, hyper, rng)


def initial_state(
    cache: DesignCache, hyper: NIGHyper, rng: np.random.Generator
) -> ChainState:
    """All nodes in one group, parameters from the full-data posterior."""
    post = posterior_from_stats(cache.stats(np.arange(cache.n_nodes)), hyper)
    params = sample_nig(post, rng)
    return ChainState(
        z=np.zeros(cache.n_nodes, dtype=np.int64),
        theta=params.theta[None, :].copy(),
        sigma2=np.array([params.sigma2]),
    )


def run_chain_on_cache(
    config: SamplerConfig,
    cache: DesignCache,
    weights: WeightMatrix,
    hyper: NIGHyper,
    on_iteration: Optional[Callable[[int, ChainState], None]] = None,
) -> ChainDraws:
    """Run a chain against precomputed designs; see ``run_chain``."""
    rng = np.random.default_rng(np.random.SeedSequence(int(config.rng_seed)))
    state = initial_state(cache, hyper, rng)
    M = config.n_recorded
    N = cache.n_nodes
    iterations = np.empty(M, dtype=np.int64)
    z_draws = np.empty((M, N), dtype=np.int64)
    K_draws = np.empty(M, dtype=np.int64)
    loglik = np.empty((M, N))
    theta_draws: List[np.ndarray] = []
    sigma2_draws: List[np.ndarray] = []

    logger.info(
        f"Starting chain: N={N}, h={weights.h:g}, iterations={config.total_iters}, "
        f"burn-in={config.burn_in}, seed={config.rng_seed}"
    )
    for it in range(1, config.total_iters + 1):
        order = rng.permutation(N) if config.shuffle_order else None
        try:
            state = gibbs_sweep(state, cache, weights, hyper, rng, order)
        except NumericalError as exc:
            raise exc.with_context(h=weights.h) from exc
        if it > config.burn_in:
            m = it - config.burn_in - 1
            iterations[m] = it
            z_draws[m] = state.z
            K_draws[m] = state.K
            theta_draws.append(state.theta.copy())
            sigma2_draws.append(state.sigma2.copy())
            loglik[m] = cache.assigned_log_likelihoods(state.z, state.theta, state.sigma2)
        if logger.isEnabledFor(logging.DEBUG) and it % 100 == 0:
            logger.debug(f"sweep {it}: K={state.K}")
        if on_iteration is not None:
            on_iteration(it, state)

    logger.info(f"Chain finished: modal K={int(np.bincount(K_draws).argmax())}")
    return ChainDraws(
        iterations=iterations,
        z=z_draws,
        K=K_draws,
        theta=theta_draws,
        sigma2=sigma2_draws,
        loglik=loglik,
        h=weights.h,
        seed=int(config.rng_seed),
    )


def run_chain(
    config: SamplerConfig,
    panel: PanelData,
    adj: AdjacencyMatrix,
    on_iteration: Optional[Callable[[int, ChainState], None]] = None,
    network: Optional[NetworkData] = None,
) -> ChainDraws:
    """
    Run one chain and keep the post-burn-in draws.

    Args:
        config: Sampler settings (seed, iterations, h, prior)
        panel: Responses and covariates
        adj: Adjacency matrix with the same node count as the panel
        on_iteration: Optional callback ``(sweep, state)`` after every sweep
        network: Precomputed graph products to reuse (distances are shared
            across smoothing values)

    Returns:
        ChainDraws with ``total_iters - burn_in`` records
    """
    if adj.n_nodes != panel.n_nodes:
        raise ValidationError(
            f"Adjacency has {adj.n_nodes} nodes but the panel has {panel.n_nodes}"
        )
    if network is None:
        network = NetworkData.build(adj, config.h, config.dense_threshold)
    elif network.h != config.h:
        network = network.with_h(config.h)
    hyper = config.resolve_hyper(panel.n_regressors)
    cache = build_design_cache(panel, network.row_norm, hyper)
    return run_chain_on_cache(config, cache, network.weights, hyper, on_iteration)


def enumerate_partitions(n: int) -> Iterator[np.ndarray]:
    """
    Every set partition of n items as a first-appearance label vector.

    Yields restricted-growth strings, e.g. (0, 0, 1) and (0, 1, 0) for n = 3.
    """
    if n < 1:
        return
    labels = [0] * n

    def _extend(pos: int, n_groups: int) -> Iterator[np.ndarray]:
        if pos == n:
            yield np.array(labels, dtype=np.int64)
            return
        for k in range(n_groups + 1):
            labels[pos] = k
            yield from _extend(pos + 1, max(n_groups, k + 1))

    yield from _extend(1, 1)


def exact_partition_posterior(
    cache: DesignCache, weights: WeightMatrix, hyper: NIGHyper
) -> Tuple[List[np.ndarray], np.ndarray]:
    """
    Exact P(Z | data) by enumeration, for tiny networks only.

    Group parameters are integrated out analytically and the gaCRP mass is
    taken sequentially over node order.
    """
    if cache.n_nodes > 10:
        raise ValidationError("Exhaustive enumeration is limited to 10 nodes")
    dense = weights.to_dense()
    partitions = list(enumerate_partitions(cache.n_nodes))
    log_post = np.empty(len(partitions))
    for idx, z in enumerate(partitions):
        value = gacrp_log_prior(z, dense, hyper.alpha)
        for k in range(int(z.max()) + 1):
            value += log_marginal_from_stats(cache.stats(np.flatnonzero(z == k)), hyper)
        log_post[idx] = value
    return partitions, np.exp(log_post - logsumexp(log_post))
