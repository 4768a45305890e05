"""Knockoff construction: moment estimation, s-solvers, conditional sampling."""

import numpy as np
import pytest
import scipy.linalg

from robustko.errors import (
    DimensionMismatch,
    NotPsd,
    NotUnitDiagonal,
    TooFewRows,
    ZeroVarianceColumn,
)
from robustko.knockoffs import (
    GroupSpec,
    KnockoffModel,
    MomentEstimate,
    estimate_moments,
    fit_group_knockoff_model,
    fit_knockoff_model,
    joint_covariance,
    sample_group_knockoffs,
    sample_knockoffs,
    solve_s_asdp,
    solve_s_equi,
    solve_s_group,
)


def ar1(p, rho):
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


def equicorr(p, rho):
    return (1.0 - rho) * np.eye(p) + rho * np.ones((p, p))


def draw(Sigma, n, seed):
    rng = np.random.default_rng(seed)
    L = np.linalg.cholesky(Sigma)
    return rng.standard_normal((n, Sigma.shape[0])) @ L.T


def min_eig_ratio(G):
    w = scipy.linalg.eigvalsh(G)
    return w[0] / max(w[-1], 1.0)


# ---------------------------------------------------------------------------
# estimate_moments


def test_moments_identical_rows_is_zero_variance():
    row = np.random.default_rng(0).normal(size=4)
    X = np.vstack([row, row])
    with pytest.raises(ZeroVarianceColumn):
        estimate_moments(X)


def test_moments_single_row_rejected():
    with pytest.raises(TooFewRows):
        estimate_moments(np.ones((1, 3)))


def test_moments_orthonormal_columns_near_identity():
    n, p = 4000, 6
    rng = np.random.default_rng(11)
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    est = estimate_moments(Q, shrinkage=None)
    assert np.max(np.abs(est.covariance - np.eye(p))) <= 3.0 / np.sqrt(n)


def test_moments_ar1_adjacent_correlation():
    n = 10000
    X = draw(ar1(4, 0.5), n, seed=21)
    est = estimate_moments(X, shrinkage=None)
    assert abs(est.covariance[0, 1] - 0.5) <= 0.03


@pytest.mark.parametrize("shrinkage", [None, "ridge", "ledoit"])
def test_moments_invariants(shrinkage):
    X = draw(equicorr(5, 0.6), 80, seed=3)
    est = estimate_moments(X, shrinkage=shrinkage)
    R = est.covariance
    assert np.allclose(R, R.T, atol=1e-10)
    assert 0.0 <= est.shrinkage_intensity <= 1.0
    w = scipy.linalg.eigvalsh(R)
    assert w[0] >= -1e-8 * max(w[-1], 1.0)
    assert est.correlation_scale.shape == (5,)
    assert np.all(est.correlation_scale > 0)


def test_moments_ridge_intensity_value():
    X = draw(np.eye(3), 50, seed=7)
    est = estimate_moments(X, shrinkage="ridge", ridge_eps=0.01)
    assert est.shrinkage_intensity == pytest.approx(0.01 / 1.01)


def test_moments_ridge_handles_duplicate_columns():
    col = np.random.default_rng(9).normal(size=(30, 1))
    X = np.hstack([col, col, np.random.default_rng(10).normal(size=(30, 1))])
    est = estimate_moments(X, shrinkage="ridge")
    w = scipy.linalg.eigvalsh(est.covariance)
    assert w[0] > 0  # ridge keeps the inverse well defined


# ---------------------------------------------------------------------------
# solve_s_equi


@pytest.mark.parametrize("p", [1, 3, 7])
def test_equi_identity(p):
    assert np.array_equal(solve_s_equi(np.eye(p)), np.ones(p))


def test_equi_two_by_two():
    Sigma = np.array([[1.0, 0.6], [0.6, 1.0]])
    assert np.allclose(solve_s_equi(Sigma), 0.8, atol=1e-10)


def test_equi_equicorrelated():
    assert np.allclose(solve_s_equi(equicorr(5, 0.8)), 0.4, atol=1e-10)


def test_equi_joint_covariance_psd():
    Sigma = np.corrcoef(draw(ar1(6, 0.7), 200, seed=5).T)
    s = solve_s_equi(Sigma)
    assert min_eig_ratio(joint_covariance(Sigma, s)) >= -1e-8


def test_equi_permutation_invariant():
    Sigma = np.corrcoef(draw(equicorr(5, 0.4), 120, seed=8).T)
    perm = np.random.default_rng(1).permutation(5)
    s = solve_s_equi(Sigma)
    s_perm = solve_s_equi(Sigma[np.ix_(perm, perm)])
    assert np.allclose(s, s_perm, atol=1e-12)


def test_equi_rejects_non_unit_diagonal():
    with pytest.raises(NotUnitDiagonal):
        solve_s_equi(2.0 * np.eye(3))


def test_equi_rejects_indefinite():
    with pytest.raises(NotPsd):
        solve_s_equi(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_equi_rejects_asymmetric():
    with pytest.raises(NotPsd):
        solve_s_equi(np.array([[1.0, 0.3], [0.1, 1.0]]))


# ---------------------------------------------------------------------------
# solve_s_asdp


def test_asdp_identity_is_full_decorrelation():
    s = solve_s_asdp(np.eye(6), block_size=10)
    assert np.allclose(s, 1.0, atol=1e-10)


def test_asdp_dominates_equi_on_ar1():
    Sigma = ar1(4, 0.5)
    s_asdp = solve_s_asdp(Sigma, block_size=2)
    s_equi = solve_s_equi(Sigma)
    assert s_asdp.sum() >= s_equi.sum() - 1e-8
    assert min_eig_ratio(joint_covariance(Sigma, s_asdp)) >= -1e-8


def test_asdp_high_equicorrelation_is_tightly_bounded():
    Sigma = equicorr(10, 0.99)
    s = solve_s_asdp(Sigma)
    assert np.all(s <= 0.02 + 1e-6)
    assert min_eig_ratio(joint_covariance(Sigma, s)) >= -1e-8


@pytest.mark.parametrize("block_size", [1, 3, 10])
def test_asdp_feasible_across_block_sizes(block_size):
    Sigma = np.corrcoef(draw(ar1(8, 0.6), 400, seed=13).T)
    s = solve_s_asdp(Sigma, block_size=block_size)
    assert np.all(s >= 0.0) and np.all(s <= 1.0 + 1e-12)
    assert min_eig_ratio(joint_covariance(Sigma, s)) >= -1e-8


def test_asdp_rejects_bad_block_size():
    with pytest.raises(ValueError):
        solve_s_asdp(np.eye(3), block_size=0)


# ---------------------------------------------------------------------------
# solve_s_group


def test_group_single_group_identity():
    groups = GroupSpec(assignments=np.ones(4, dtype=int), group_count=1)
    S, gamma = solve_s_group(np.eye(4), groups)
    assert gamma == 1.0
    assert np.array_equal(S, np.eye(4))


def test_group_independent_blocks_full_gamma():
    block = np.array([[1.0, 0.5], [0.5, 1.0]])
    Sigma = scipy.linalg.block_diag(block, block)
    groups = GroupSpec(assignments=np.array([1, 1, 2, 2]), group_count=2)
    S, gamma = solve_s_group(Sigma, groups)
    assert gamma == 1.0
    assert np.allclose(S, Sigma, atol=1e-12)


def test_group_correlated_groups_feasible():
    Sigma = equicorr(4, 0.6)
    groups = GroupSpec(assignments=np.array([1, 1, 2, 2]), group_count=2)
    S, gamma = solve_s_group(Sigma, groups)
    assert 0.0 < gamma <= 1.0
    # S is gamma times the block-diagonal restriction of Sigma
    expected = np.zeros_like(Sigma)
    expected[:2, :2] = Sigma[:2, :2]
    expected[2:, 2:] = Sigma[2:, 2:]
    assert np.allclose(S, gamma * expected, atol=1e-12)
    w = scipy.linalg.eigvalsh(2.0 * Sigma - S)
    assert w[0] >= -1e-8


def test_group_spec_validation():
    with pytest.raises(Exception):
        GroupSpec(assignments=np.array([1, 3]), group_count=3)  # group 2 empty


# ---------------------------------------------------------------------------
# sampling


def test_sampling_zero_s_returns_data_bitwise():
    col = np.random.default_rng(5).normal(size=(40, 1))
    X = np.hstack([col, col])  # perfectly correlated, so lambda_min = 0
    model = fit_knockoff_model(X, method="equi", shrinkage=None)
    assert np.array_equal(model.s, np.zeros(2))
    Xk = sample_knockoffs(X, model, seed=0)
    assert np.array_equal(Xk, X)


def test_sampling_identity_full_decorrelation_moments():
    # Sigma = I with s = 1 makes the knockoff an independent standard normal
    p, n = 4, 20000
    moments = MomentEstimate(
        mean=np.zeros(p),
        covariance=np.eye(p),
        shrinkage_intensity=0.0,
        correlation_scale=np.ones(p),
    )
    model = KnockoffModel(
        moments=moments,
        s=np.ones(p),
        method="equi",
        conditional_mean_map=np.eye(p),
        conditional_cov_factor=np.eye(p),
    )
    X = np.random.default_rng(2).standard_normal((n, p))
    Xk = sample_knockoffs(X, model, seed=3)
    for j in range(p):
        cross = np.cov(X[:, j], Xk[:, j])[0, 1]
        assert abs(cross) <= 0.025
        assert abs(np.var(Xk[:, j], ddof=1) - 1.0) <= 0.025


def test_sampling_is_deterministic():
    X = draw(ar1(5, 0.4), 60, seed=17)
    model = fit_knockoff_model(X, method="equi")
    a = sample_knockoffs(X, model, seed=123)
    b = sample_knockoffs(X, model, seed=123)
    assert np.array_equal(a, b)
    c = sample_knockoffs(X, model, seed=124)
    assert not np.array_equal(a, c)


def test_sampling_rejects_wrong_width():
    X = draw(np.eye(3), 30, seed=1)
    model = fit_knockoff_model(X, method="equi")
    with pytest.raises(DimensionMismatch):
        sample_knockoffs(X[:, :2], model, seed=0)


def test_conditional_factor_reproduces_covariance():
    X = draw(ar1(6, 0.5), 500, seed=19)
    model = fit_knockoff_model(X, method="asdp")
    Sigma = model.moments.covariance
    S = np.diag(model.s)
    C = 2.0 * S - S @ np.linalg.solve(Sigma, S)
    L = model.conditional_cov_factor
    assert np.allclose(L @ L.T, C, atol=1e-8)
    assert np.allclose(L, np.tril(L))


def test_moment_matching_ar1():
    # sample second moments of (X, Xk) track the population joint covariance
    p, n = 5, 20000
    Sigma = ar1(p, 0.3)
    X = draw(Sigma, n, seed=29)
    model = fit_knockoff_model(X, method="equi", shrinkage=None)
    Xk = sample_knockoffs(X, model, seed=31)
    tol = 5.0 / np.sqrt(n)
    assert np.max(np.abs(np.cov(Xk.T) - Sigma)) <= tol
    cross = np.cov(np.hstack([X, Xk]).T)[:p, p:]
    assert np.max(np.abs(cross - (Sigma - np.diag(model.s)))) <= tol


# ---------------------------------------------------------------------------
# group sampling


def test_group_knockoffs_singleton_groups_identity():
    p, n = 4, 20000
    X = draw(np.eye(p), n, seed=37)
    groups = GroupSpec(assignments=np.arange(1, p + 1), group_count=p)
    Xk = sample_group_knockoffs(X, groups, seed=41, shrinkage=None)
    cross = np.cov(np.hstack([X, Xk]).T)[:p, p:]
    assert np.max(np.abs(np.diag(cross))) <= 0.025


def test_group_model_records_gamma():
    X = draw(equicorr(4, 0.5), 300, seed=43)
    groups = GroupSpec(assignments=np.array([1, 1, 2, 2]), group_count=2)
    model = fit_group_knockoff_model(X, groups)
    assert model.method == "group_equi"
    assert model.gamma is not None and 0.0 < model.gamma <= 1.0
    Xk = sample_knockoffs(X, model, seed=47)
    assert Xk.shape == X.shape
    assert np.array_equal(Xk, sample_knockoffs(X, model, seed=47))
