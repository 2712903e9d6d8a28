import numpy as np
import pytest
from scipy import integrate, stats

from gagnar.core.errors import ValidationError
from gagnar.core.graph import AdjacencyMatrix, row_normalized_adjacency
from gagnar.core.model import (
    GroupParams,
    NIGHyper,
    NodeDesign,
    PanelData,
    SufficientStats,
    build_design_cache,
    build_node_design,
    gacrp_log_prior,
    joint_log_posterior,
    log_likelihood,
    log_marginal_from_stats,
    log_marginal_likelihood,
    nig_log_density,
    nig_posterior,
    posterior_from_stats,
)

from .conftest import path_graph


def random_design(rng, n_obs=6, dim=3):
    X = rng.normal(size=(n_obs, dim))
    return NodeDesign(y=rng.normal(size=n_obs), X=X)


def test_node_design_layout():
    Y = np.arange(12, dtype=float).reshape(3, 4)
    V = np.array([[1.5], [2.5], [3.5]])
    adj = path_graph(3)
    W = row_normalized_adjacency(adj)
    design = build_node_design(PanelData(Y=Y, V=V), W, 1)
    np.testing.assert_array_equal(design.y, Y[1, 1:])
    np.testing.assert_array_equal(design.X[:, 0], 1.0)
    # node 1 averages nodes 0 and 2
    np.testing.assert_allclose(design.X[:, 1], 0.5 * (Y[0, :-1] + Y[2, :-1]))
    np.testing.assert_array_equal(design.X[:, 2], Y[1, :-1])
    np.testing.assert_array_equal(design.X[:, 3], 2.5)


def test_isolated_node_has_zero_network_regressor(rng):
    adj = AdjacencyMatrix.from_edges([(0, 1), (1, 0)], 3)
    panel = PanelData.without_covariates(rng.normal(size=(3, 5)))
    design = build_node_design(panel, row_normalized_adjacency(adj), 2)
    np.testing.assert_array_equal(design.X[:, 1], 0.0)


def test_design_cache_matches_node_designs(rng):
    panel = PanelData(Y=rng.normal(size=(5, 6)), V=rng.normal(size=(5, 2)))
    W = row_normalized_adjacency(path_graph(5))
    cache = build_design_cache(panel, W)
    for i in range(5):
        design = build_node_design(panel, W, i)
        np.testing.assert_allclose(cache.X[i], design.X)
        np.testing.assert_allclose(cache.XtX[i], design.X.T @ design.X)


def test_log_likelihood_matches_scipy(rng):
    design = random_design(rng)
    params = GroupParams(theta=rng.normal(size=3), sigma2=1.7)
    expected = stats.norm.logpdf(design.y, design.X @ params.theta, np.sqrt(1.7)).sum()
    assert log_likelihood(design, params) == pytest.approx(expected)


def test_log_likelihood_dimension_mismatch(rng):
    design = random_design(rng, dim=4)
    with pytest.raises(ValidationError):
        log_likelihood(design, GroupParams(theta=np.zeros(3), sigma2=1.0))


def test_group_params_require_positive_variance():
    with pytest.raises(ValidationError):
        GroupParams(theta=np.zeros(3), sigma2=0.0)


@pytest.mark.parametrize("seed", range(50))
def test_sequential_update_equals_batch(seed):
    rng = np.random.default_rng(seed)
    hyper = NIGHyper.default(3, sigma0_scale=10.0, a0=2.0, b0=1.5)
    first, second = random_design(rng), random_design(rng)
    batch = nig_posterior([first, second], hyper)
    step = nig_posterior([first], hyper)
    chained = nig_posterior([second], NIGHyper(step.tau, step.Sigma, step.a, step.b))
    np.testing.assert_allclose(chained.tau, batch.tau, rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(chained.Sigma, batch.Sigma, rtol=1e-8, atol=1e-12)
    assert chained.a == pytest.approx(batch.a)
    assert chained.b == pytest.approx(batch.b, rel=1e-8)


def test_empty_group_returns_prior(vague_prior):
    post = nig_posterior([], vague_prior)
    np.testing.assert_array_equal(post.tau, vague_prior.tau0)
    assert post.a == vague_prior.a0 and post.b == vague_prior.b0


def test_b_star_alternative_identity(rng):
    hyper = NIGHyper.default(3, tau0=0.3, sigma0_scale=4.0, a0=1.0, b0=2.0)
    design = random_design(rng, n_obs=9)
    post = nig_posterior([design], hyper)
    # b* = b0 + 0.5 * (y - X tau0)' (I + X Sigma0 X')^{-1} (y - X tau0)
    resid = design.y - design.X @ hyper.tau0
    M = np.eye(9) + design.X @ hyper.Sigma0 @ design.X.T
    expected = hyper.b0 + 0.5 * resid @ np.linalg.solve(M, resid)
    assert post.b == pytest.approx(expected, rel=1e-9)


def test_large_sample_limit_is_least_squares(rng):
    X = np.column_stack([np.ones(4000), rng.normal(size=(4000, 2))])
    y = X @ np.array([1.0, -2.0, 0.5]) + rng.normal(scale=0.3, size=4000)
    post = nig_posterior([NodeDesign(y=y, X=X)], NIGHyper.default(3, sigma0_scale=1e6))
    ols, *_ = np.linalg.lstsq(X, y, rcond=None)
    np.testing.assert_allclose(post.tau, ols, atol=1e-4)


def test_marginal_is_multivariate_t(rng):
    hyper = NIGHyper.default(3, tau0=0.5, sigma0_scale=2.0, a0=3.0, b0=2.0)
    design = random_design(rng, n_obs=5)
    # y ~ t_{2 a0}(X tau0, (b0 / a0) (I + X Sigma0 X'))
    shape = (hyper.b0 / hyper.a0) * (np.eye(5) + design.X @ hyper.Sigma0 @ design.X.T)
    expected = stats.multivariate_t.logpdf(
        design.y, loc=design.X @ hyper.tau0, shape=shape, df=2 * hyper.a0
    )
    assert log_marginal_likelihood(design, hyper) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("seed", range(50))
def test_marginal_chain_rule(seed):
    """log g(A and B) = log g(A) + log g(B | A)."""
    rng = np.random.default_rng(seed)
    hyper = NIGHyper.default(3, sigma0_scale=5.0, a0=1.5, b0=1.0)
    a, b = random_design(rng), random_design(rng)
    joint = log_marginal_from_stats(SufficientStats.from_designs([a, b], 3), hyper)
    post = nig_posterior([a], hyper)
    conditional = log_marginal_likelihood(b, NIGHyper(post.tau, post.Sigma, post.a, post.b))
    assert joint == pytest.approx(log_marginal_likelihood(a, hyper) + conditional, rel=1e-9)


def test_marginal_against_quadrature():
    """One regressor: integrate theta and sigma^2 numerically."""
    hyper = NIGHyper.default(1, tau0=0.2, sigma0_scale=1.5, a0=3.0, b0=2.0)
    X = np.ones((3, 1))
    y = np.array([0.4, -0.3, 1.1])
    design = NodeDesign(y=y, X=X)

    def integrand(theta, sigma2):
        prior = nig_log_density(
            np.array([theta]), sigma2, hyper.tau0, hyper.Sigma0, hyper.a0, hyper.b0
        )
        like = log_likelihood(design, GroupParams(theta=np.array([theta]), sigma2=sigma2))
        return np.exp(prior + like)

    value, _ = integrate.dblquad(integrand, 1e-6, 500.0, -15.0, 15.0, epsabs=1e-12, epsrel=1e-8)
    assert log_marginal_likelihood(design, hyper) == pytest.approx(np.log(value), abs=1e-4)


def test_nig_density_integrates_to_one():
    tau, Sigma, a, b = np.array([0.3]), np.array([[0.8]]), 2.5, 1.2
    value, _ = integrate.dblquad(
        lambda th, s2: np.exp(nig_log_density(np.array([th]), s2, tau, Sigma, a, b)),
        1e-8,
        2000.0,
        -40.0,
        40.0,
    )
    assert value == pytest.approx(1.0, abs=1e-4)


def test_posterior_from_stats_matches_designs(rng):
    hyper = NIGHyper.default(3)
    designs = [random_design(rng) for _ in range(3)]
    via_stats = posterior_from_stats(SufficientStats.from_designs(designs, 3), hyper)
    direct = nig_posterior(designs, hyper)
    np.testing.assert_allclose(via_stats.tau, direct.tau)


def test_prior_validation():
    with pytest.raises(ValidationError):
        NIGHyper(tau0=np.zeros(2), Sigma0=np.eye(3))
    with pytest.raises(ValidationError):
        NIGHyper(tau0=np.zeros(2), Sigma0=np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValidationError):
        NIGHyper.default(2, a0=0.0)
    with pytest.raises(ValidationError):
        NIGHyper.default(2, alpha=-1.0)


def test_vector_tau0_default():
    hyper = NIGHyper.default(3, tau0=(1.0, 2.0, 3.0))
    np.testing.assert_array_equal(hyper.tau0, [1.0, 2.0, 3.0])


def test_panel_validation():
    with pytest.raises(ValidationError):
        PanelData.without_covariates(np.zeros((3, 1)))
    with pytest.raises(ValidationError):
        PanelData(Y=np.zeros((3, 4)), V=np.zeros((2, 1)))
    Y = np.zeros((2, 3))
    Y[0, 1] = np.nan
    with pytest.raises(ValidationError):
        PanelData.without_covariates(Y)


def test_gacrp_prior_reduces_to_crp():
    """Uniform weights give the Ewens partition probability."""
    alpha = 1.3
    W = np.ones((4, 4))
    z = np.array([0, 0, 1, 0])
    # alpha^K prod (n_k - 1)! / prod_{i<N} (alpha + i)
    expected = np.log(alpha**2 * 2 * 1 / (alpha * (alpha + 1) * (alpha + 2) * (alpha + 3)))
    assert gacrp_log_prior(z, W, alpha) == pytest.approx(expected)


def test_gacrp_prior_forbids_unreachable_join():
    W = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert gacrp_log_prior(np.array([0, 0]), W, 1.0) == -np.inf
    assert np.isfinite(gacrp_log_prior(np.array([0, 1]), W, 1.0))


def test_joint_log_posterior_adds_its_parts(rng):
    panel = PanelData.without_covariates(rng.normal(size=(4, 5)))
    W = row_normalized_adjacency(path_graph(4))
    hyper = NIGHyper.default(3, a0=2.0, b0=1.0)
    cache = build_design_cache(panel, W, hyper)
    z = np.array([0, 0, 1, 1])
    theta = rng.normal(size=(2, 3))
    sigma2 = np.array([0.7, 1.3])
    weights = np.ones((4, 4))
    expected = gacrp_log_prior(z, weights, hyper.alpha)
    for i in range(4):
        params = GroupParams(theta=theta[z[i]], sigma2=sigma2[z[i]])
        expected += log_likelihood(build_node_design(panel, W, i), params)
    for k in range(2):
        expected += nig_log_density(theta[k], sigma2[k], hyper.tau0, hyper.Sigma0, hyper.a0, hyper.b0)
    assert joint_log_posterior(z, theta, sigma2, cache, weights, hyper) == pytest.approx(expected)
