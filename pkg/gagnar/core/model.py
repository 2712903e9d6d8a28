"""
Probability model of the grouped network autoregression.

Each node i follows, for t = 2..T,

    Y_it = beta_0 + beta_1 (W Y_{t-1})_i + beta_2 Y_i(t-1) + V_i' gamma + eps_it

with group-specific (theta_k, sigma_k^2) under a normal-inverse-gamma prior
theta | sigma^2 ~ N(tau0, sigma^2 Sigma0), sigma^2 ~ IG(a0, b0).

Densities are evaluated in log space throughout. SPD systems are solved by
Cholesky factorization with escalating diagonal jitter.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import gammaln

from .errors import NumericalError, ValidationError

logger = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))
JITTER_LADDER = (1e-10, 1e-9, 1e-8, 1e-7, 1e-6)
N_BASE_REGRESSORS = 3  # intercept, network lag, own lag


def cholesky_with_jitter(matrix: np.ndarray, what: str = "matrix") -> np.ndarray:
    """
    Lower Cholesky factor of an SPD matrix.

    Retries with diagonal jitter from 1e-10 up to 1e-6 before giving up.

    Raises:
        NumericalError: if the matrix is not positive definite even with jitter
    """
    if not np.all(np.isfinite(matrix)):
        raise NumericalError(f"Non-finite entries in {what}")
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        pass
    eye = np.eye(matrix.shape[0])
    for jitter in JITTER_LADDER:
        try:
            factor = linalg.cholesky(matrix + jitter * eye, lower=True)
        except linalg.LinAlgError:
            continue
        logger.warning(f"Cholesky of {what} needed diagonal jitter {jitter:g}")
        return factor
    raise NumericalError(
        f"{what} is not positive definite after jitter {JITTER_LADDER[-1]:g}; "
        "the design is numerically degenerate"
    )


def _log_det_from_chol(factor: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


@dataclass(frozen=True)
class PanelData:
    """
    Responses and static covariates.

    Attributes:
        Y: N x T response matrix, column t-1 holds time t
        V: N x p covariate matrix (p may be zero)
    """

    Y: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=np.float64)
        V = np.asarray(self.V, dtype=np.float64)
        if Y.ndim != 2:
            raise ValidationError(f"Responses must be a 2-D N x T matrix, got {Y.ndim}-D")
        if V.ndim == 1 and V.size == 0:
            V = V.reshape(Y.shape[0], 0)
        if V.ndim != 2 or V.shape[0] != Y.shape[0]:
            raise ValidationError(
                f"Covariates must have {Y.shape[0]} rows, got shape {V.shape}"
            )
        if Y.shape[1] < 2:
            raise ValidationError(f"Need at least T = 2 time points, got {Y.shape[1]}")
        if not (np.all(np.isfinite(Y)) and np.all(np.isfinite(V))):
            raise ValidationError("Panel data contains missing or non-finite entries")
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "V", V)

    @classmethod
    def without_covariates(cls, Y: np.ndarray) -> "PanelData":
        Y = np.asarray(Y, dtype=np.float64)
        return cls(Y=Y, V=np.zeros((Y.shape[0], 0)))

    @property
    def n_nodes(self) -> int:
        return self.Y.shape[0]

    @property
    def n_times(self) -> int:
        return self.Y.shape[1]

    @property
    def n_covariates(self) -> int:
        return self.V.shape[1]

    @property
    def n_regressors(self) -> int:
        return self.n_covariates + N_BASE_REGRESSORS

    def window(self, start: int, stop: int) -> "PanelData":
        """Columns start..stop-1 (zero-based) as a new panel."""
        return PanelData(Y=self.Y[:, start:stop], V=self.V)


@dataclass(frozen=True)
class NodeDesign:
    """Regression data of one node: y is (T-1,), X is (T-1, p+3)."""

    y: np.ndarray
    X: np.ndarray

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class GroupParams:
    """Regression coefficients (beta_0, beta_1, beta_2, gamma...) and noise variance."""

    theta: np.ndarray
    sigma2: float

    def __post_init__(self):
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValidationError(f"sigma2 must be positive, got {self.sigma2}")
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=np.float64))

    @property
    def beta0(self) -> float:
        return float(self.theta[0])

    @property
    def beta1(self) -> float:
        return float(self.theta[1])

    @property
    def beta2(self) -> float:
        return float(self.theta[2])

    @property
    def gamma(self) -> np.ndarray:
        return self.theta[N_BASE_REGRESSORS:]


@dataclass(frozen=True)
class NIGHyper:
    """
    Normal-inverse-gamma prior plus the gaCRP concentration alpha.

    Derived quantities (precision, log-determinant, ...) are computed once and
    cached on the instance.
    """

    tau0: np.ndarray
    Sigma0: np.ndarray
    a0: float = 0.01
    b0: float = 0.01
    alpha: float = 1.0

    def __post_init__(self):
        tau0 = np.asarray(self.tau0, dtype=np.float64).ravel()
        Sigma0 = np.atleast_2d(np.asarray(self.Sigma0, dtype=np.float64))
        if Sigma0.shape != (tau0.size, tau0.size):
            raise ValidationError(
                f"Sigma0 must be {tau0.size}x{tau0.size}, got {Sigma0.shape}"
            )
        if not np.allclose(Sigma0, Sigma0.T, rtol=0, atol=1e-12):
            raise ValidationError("Sigma0 must be symmetric")
        for name in ("a0", "b0", "alpha"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be positive, got {value}")
        if np.linalg.eigvalsh(Sigma0).min() <= 0:
            raise ValidationError("Sigma0 must be positive definite")
        object.__setattr__(self, "tau0", tau0)
        object.__setattr__(self, "Sigma0", Sigma0)

    @classmethod
    def default(
        cls,
        n_regressors: int,
        tau0: Union[float, Sequence[float]] = 0.0,
        sigma0_scale: float = 100.0,
        a0: float = 0.01,
        b0: float = 0.01,
        alpha: float = 1.0,
    ) -> "NIGHyper":
        """tau0 filled from a scalar (or given in full) and Sigma0 = scale * I."""
        mean = np.broadcast_to(np.asarray(tau0, dtype=np.float64), (n_regressors,))
        return cls(
            tau0=mean.copy(),
            Sigma0=sigma0_scale * np.eye(n_regressors),
            a0=a0,
            b0=b0,
            alpha=alpha,
        )

    @property
    def dim(self) -> int:
        return self.tau0.size

    @cached_property
    def _prior_chol(self) -> np.ndarray:
        return cholesky_with_jitter(self.Sigma0, "prior covariance Sigma0")

    @cached_property
    def precision0(self) -> np.ndarray:
        """Sigma0^{-1}."""
        inv = linalg.cho_solve((self._prior_chol, True), np.eye(self.dim))
        return 0.5 * (inv + inv.T)

    @cached_property
    def log_det_sigma0(self) -> float:
        return _log_det_from_chol(self._prior_chol)

    @cached_property
    def precision_mean0(self) -> np.ndarray:
        """Sigma0^{-1} tau0."""
        return self.precision0 @ self.tau0

    @cached_property
    def quad0(self) -> float:
        """tau0' Sigma0^{-1} tau0."""
        return float(self.tau0 @ self.precision_mean0)

    def with_alpha(self, alpha: float) -> "NIGHyper":
        return NIGHyper(self.tau0, self.Sigma0, self.a0, self.b0, alpha)


@dataclass(frozen=True)
class NIGPosterior:
    """NIG(tau, Sigma, a, b): theta | sigma^2 ~ N(tau, sigma^2 Sigma), sigma^2 ~ IG(a, b)."""

    tau: np.ndarray
    Sigma: np.ndarray
    a: float
    b: float
    log_det_sigma: float = field(default=float("nan"), repr=False)


@dataclass(frozen=True)
class SufficientStats:
    """Summed Gram blocks of a set of nodes."""

    XtX: np.ndarray
    Xty: np.ndarray
    yty: float
    n_obs: int

    @classmethod
    def empty(cls, dim: int) -> "SufficientStats":
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0.0, 0)

    @classmethod
    def from_designs(cls, designs: Iterable[NodeDesign], dim: int) -> "SufficientStats":
        XtX = np.zeros((dim, dim))
        Xty = np.zeros(dim)
        yty = 0.0
        n_obs = 0
        for design in designs:
            XtX += design.X.T @ design.X
            Xty += design.X.T @ design.y
            yty += float(design.y @ design.y)
            n_obs += design.n_obs
        return cls(XtX, Xty, yty, n_obs)


def _posterior_core(
    stats: SufficientStats, hyper: NIGHyper
) -> Tuple[np.ndarray, np.ndarray, float, float, float]:
    """Returns (tau*, chol of Sigma*^{-1}, a*, b*, log|Sigma*|)."""
    precision = hyper.precision0 + stats.XtX
    factor = cholesky_with_jitter(precision, "posterior precision")
    rhs = hyper.precision_mean0 + stats.Xty
    tau = linalg.cho_solve((factor, True), rhs)
    a_star = hyper.a0 + 0.5 * stats.n_obs
    # tau*' Sigma*^{-1} tau* = tau*' rhs
    b_star = hyper.b0 + 0.5 * (hyper.quad0 + stats.yty - float(tau @ rhs))
    if not (np.isfinite(b_star) and b_star > 0):
        raise NumericalError(f"Posterior scale b* = {b_star!r} is not positive")
    return tau, factor, a_star, b_star, -_log_det_from_chol(factor)


def posterior_from_stats(stats: SufficientStats, hyper: NIGHyper) -> NIGPosterior:
    """Conjugate NIG update from summed sufficient statistics."""
    if stats.n_obs == 0:
        return NIGPosterior(
            tau=hyper.tau0.copy(),
            Sigma=hyper.Sigma0.copy(),
            a=hyper.a0,
            b=hyper.b0,
            log_det_sigma=hyper.log_det_sigma0,
        )
    tau, factor, a_star, b_star, log_det = _posterior_core(stats, hyper)
    Sigma = linalg.cho_solve((factor, True), np.eye(hyper.dim))
    Sigma = 0.5 * (Sigma + Sigma.T)
    return NIGPosterior(tau=tau, Sigma=Sigma, a=a_star, b=b_star, log_det_sigma=log_det)


def log_marginal_from_stats(stats: SufficientStats, hyper: NIGHyper) -> float:
    """log of the NIG-marginalized likelihood of the pooled observations."""
    if stats.n_obs == 0:
        return 0.0
    _, _, a_star, b_star, log_det = _posterior_core(stats, hyper)
    return float(
        hyper.a0 * np.log(hyper.b0)
        - a_star * np.log(b_star)
        + gammaln(a_star)
        - gammaln(hyper.a0)
        + 0.5 * (log_det - hyper.log_det_sigma0)
        - 0.5 * stats.n_obs * LOG_2PI
    )


def build_node_design(panel: PanelData, row_norm_adj, i: int) -> NodeDesign:
    """
    Design of node i over t = 2..T.

    Row t-1 is (1, (W Y_{t-1})_i, Y_i(t-1), V_i'); the response is Y_it.
    """
    if panel.n_times < 2:
        raise ValidationError("Need at least two time points to build a design")
    if not 0 <= i < panel.n_nodes:
        raise ValidationError(f"Node index {i} out of range for {panel.n_nodes} nodes")
    lagged = panel.Y[:, :-1]
    network_lag = np.asarray(row_norm_adj[i] @ lagged).ravel()
    n_obs = panel.n_times - 1
    X = np.column_stack(
        [
            np.ones(n_obs),
            network_lag,
            lagged[i],
            np.tile(panel.V[i], (n_obs, 1)),
        ]
    )
    return NodeDesign(y=panel.Y[i, 1:].copy(), X=X)


def log_likelihood(design: NodeDesign, params: GroupParams) -> float:
    """Gaussian log-likelihood of one node's series under one group's parameters."""
    if design.X.shape[1] != params.theta.size:
        raise ValidationError(
            f"Design has {design.X.shape[1]} columns but theta has {params.theta.size}"
        )
    if not params.sigma2 > 0:
        raise ValidationError("sigma2 must be positive")
    resid = design.y - design.X @ params.theta
    return float(
        -0.5 * design.n_obs * (LOG_2PI + np.log(params.sigma2))
        - 0.5 * float(resid @ resid) / params.sigma2
    )


def nig_posterior(designs: Sequence[NodeDesign], hyper: NIGHyper) -> NIGPosterior:
    """
    Posterior of (theta_k, sigma_k^2) given the nodes of group k.

    An empty group returns the prior.
    """
    for design in designs:
        if design.X.shape[1] != hyper.dim:
            raise ValidationError(
                f"Design has {design.X.shape[1]} columns, prior has {hyper.dim}"
            )
    return posterior_from_stats(SufficientStats.from_designs(designs, hyper.dim), hyper)


def log_marginal_likelihood(design: NodeDesign, hyper: NIGHyper) -> float:
    """log g(Y_(i)): the node likelihood with (theta, sigma^2) integrated out."""
    if design.X.shape[1] != hyper.dim:
        raise ValidationError(
            f"Design has {design.X.shape[1]} columns, prior has {hyper.dim}"
        )
    return log_marginal_from_stats(SufficientStats.from_designs([design], hyper.dim), hyper)


def nig_log_density(
    theta: np.ndarray,
    sigma2: float,
    tau: np.ndarray,
    Sigma: np.ndarray,
    a: float,
    b: float,
) -> float:
    """log NIG(theta, sigma^2; tau, Sigma, a, b)."""
    d = tau.size
    factor = cholesky_with_jitter(Sigma, "NIG covariance")
    diff = linalg.solve_triangular(factor, theta - tau, lower=True)
    return float(
        a * np.log(b)
        - gammaln(a)
        - 0.5 * d * LOG_2PI
        - 0.5 * _log_det_from_chol(factor)
        - (a + 0.5 * d + 1.0) * np.log(sigma2)
        - (b + 0.5 * float(diff @ diff)) / sigma2
    )


@dataclass(frozen=True)
class DesignCache:
    """
    Stacked node designs and their Gram blocks, built once per dataset.

    Attributes:
        X: (N, T-1, d) design tensor
        y: (N, T-1) responses
        XtX: (N, d, d) per-node X'X
        Xty: (N, d) per-node X'y
        yty: (N,) per-node y'y
        log_g: (N,) single-node log marginal likelihoods under ``hyper``
    """

    X: np.ndarray
    y: np.ndarray
    XtX: np.ndarray
    Xty: np.ndarray
    yty: np.ndarray
    log_g: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.y.shape[0]

    @property
    def n_obs(self) -> int:
        return self.y.shape[1]

    @property
    def dim(self) -> int:
        return self.X.shape[2]

    def design(self, i: int) -> NodeDesign:
        return NodeDesign(y=self.y[i], X=self.X[i])

    def stats(self, members: np.ndarray) -> SufficientStats:
        """Summed statistics of the given node indices."""
        members = np.asarray(members, dtype=np.int64)
        return SufficientStats(
            XtX=self.XtX[members].sum(axis=0),
            Xty=self.Xty[members].sum(axis=0),
            yty=float(self.yty[members].sum()),
            n_obs=int(members.size) * self.n_obs,
        )

    def node_log_likelihoods(
        self, i: int, theta: np.ndarray, sigma2: np.ndarray
    ) -> np.ndarray:
        """log f(Y_(i); X_(i), theta_k, sigma_k^2) for every row of theta."""
        resid = self.y[i][:, None] - self.X[i] @ theta.T
        ss = np.einsum("tk,tk->k", resid, resid)
        return -0.5 * self.n_obs * (LOG_2PI + np.log(sigma2)) - 0.5 * ss / sigma2

    def assigned_log_likelihoods(
        self, z: np.ndarray, theta: np.ndarray, sigma2: np.ndarray
    ) -> np.ndarray:
        """Per-node log-likelihood under each node's own group."""
        fitted = np.einsum("ntd,nd->nt", self.X, theta[z])
        resid = self.y - fitted
        s2 = sigma2[z]
        ss = np.einsum("nt,nt->n", resid, resid)
        return -0.5 * self.n_obs * (LOG_2PI + np.log(s2)) - 0.5 * ss / s2


def build_design_cache(
    panel: PanelData, row_norm_adj, hyper: Optional[NIGHyper] = None
) -> DesignCache:
    """
    Precompute all node designs at once.

    When ``hyper`` is given, the single-node log marginal likelihoods used
    for new-group proposals are cached as well.
    """
    if row_norm_adj.shape != (panel.n_nodes, panel.n_nodes):
        raise ValidationError(
            f"Adjacency is {row_norm_adj.shape} but panel has {panel.n_nodes} nodes"
        )
    N, T = panel.Y.shape
    n_obs = T - 1
    lagged = panel.Y[:, :-1]
    network_lag = np.asarray(row_norm_adj @ lagged)
    X = np.empty((N, n_obs, panel.n_regressors))
    X[:, :, 0] = 1.0
    X[:, :, 1] = network_lag
    X[:, :, 2] = lagged
    X[:, :, N_BASE_REGRESSORS:] = panel.V[:, None, :]
    y = panel.Y[:, 1:].copy()
    XtX = np.einsum("ntd,nte->nde", X, X)
    Xty = np.einsum("ntd,nt->nd", X, y)
    yty = np.einsum("nt,nt->n", y, y)
    log_g = np.zeros(N)
    if hyper is not None:
        if hyper.dim != panel.n_regressors:
            raise ValidationError(
                f"Prior dimension {hyper.dim} does not match {panel.n_regressors} regressors"
            )
        for i in range(N):
            stats = SufficientStats(XtX[i], Xty[i], float(yty[i]), n_obs)
            try:
                log_g[i] = log_marginal_from_stats(stats, hyper)
            except NumericalError as exc:
                raise exc.with_context(node=i) from exc
    return DesignCache(X=X, y=y, XtX=XtX, Xty=Xty, yty=yty, log_g=log_g)


def gacrp_log_prior(z: np.ndarray, weights: np.ndarray, alpha: float) -> float:
    """
    Sequential gaCRP mass of a labelling over the node order 1..N.

    Node i joins an earlier group k with weight sum_{j<i} w_ij I(z_j = k)
    and opens a new group with weight alpha.
    """
    z = np.asarray(z)
    W = np.asarray(weights, dtype=np.float64)
    total = 0.0
    for i in range(z.size):
        earlier = z[:i]
        w = W[i, :i]
        seen = np.unique(earlier)
        mass = {int(k): float(w[earlier == k].sum()) for k in seen}
        denom = sum(mass.values()) + alpha
        numer = mass[int(z[i])] if int(z[i]) in mass else alpha
        if numer <= 0:
            return float("-inf")
        total += np.log(numer) - np.log(denom)
    return float(total)


def joint_log_posterior(
    z: np.ndarray,
    theta: np.ndarray,
    sigma2: np.ndarray,
    cache: DesignCache,
    weights: np.ndarray,
    hyper: NIGHyper,
) -> float:
    """Unnormalized log pi(Z) + sum_k log NIG prior + sum_i log f."""
    value = gacrp_log_prior(z, weights, hyper.alpha)
    for k in range(theta.shape[0]):
        value += nig_log_density(
            theta[k], float(sigma2[k]), hyper.tau0, hyper.Sigma0, hyper.a0, hyper.b0
        )
    value += float(cache.assigned_log_likelihoods(z, theta, sigma2).sum())
    return value


def summarize_groups(params: Sequence[GroupParams]) -> List[dict]:
    """Plain dict rows for reporting."""
    rows = []
    for k, group in enumerate(params):
        rows.append(
            {
                "group": k + 1,
                "beta0": group.beta0,
                "beta1": group.beta1,
                "beta2": group.beta2,
                "gamma": group.gamma.tolist(),
                "sigma2": float(group.sigma2),
            }
        )
    return rows
