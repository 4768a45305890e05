"""Lasso / elastic-net / group-lasso paths, CV selection, and HC3 OLS."""

import numpy as np
import pytest
import scipy.linalg

from robustko.errors import (
    DimensionMismatch,
    LeverageOne,
    SingularDesign,
    TooFewRows,
)
from robustko.knockoffs import GroupSpec
from robustko.regression import (
    GridSpec,
    cv_select_lambda,
    elastic_net_fit,
    group_lasso_path,
    lasso_path,
    ols_hc3,
)


def orthonormal_design(n, p):
    """Zero-mean columns with X'X/n = I exactly (scaled Helmert contrasts)."""
    H = scipy.linalg.helmert(n)  # (n-1, n), orthonormal rows, orthogonal to 1
    return np.sqrt(n) * H[:p].T


def soft(z, lam):
    return np.sign(z) * max(abs(z) - lam, 0.0)


# ---------------------------------------------------------------------------
# lasso_path


def test_lasso_zero_response_is_inactive_everywhere():
    X = np.random.default_rng(0).normal(size=(30, 5))
    path = lasso_path(X, np.zeros(30))
    assert np.all(path.coefficients == 0.0)
    assert np.all(path.entry_lambda == 0.0)


def test_lasso_orthonormal_soft_threshold():
    n, p = 32, 4
    X = orthonormal_design(n, p)
    c = np.array([1.0, 0.8, 0.4, 0.1])
    y = X @ c  # X_j'y/n = c_j exactly
    path = lasso_path(X, y, GridSpec(lambdas=np.array([0.5, 0.3, 0.1])))
    beta, intercept = path.coefficients_at(0.3)
    expected = np.array([soft(cj, 0.3) for cj in c])
    assert np.allclose(beta, expected, atol=1e-6)
    assert beta[0] == pytest.approx(0.7, abs=1e-6)
    assert intercept == pytest.approx(0.0, abs=1e-8)


def test_lasso_entry_lambda_at_activation_point():
    n = 32
    X = orthonormal_design(n, 3)
    y = X @ np.array([1.0, 0.8, 0.0])
    path = lasso_path(X, y)
    grid = path.lambda_grid
    assert grid[0] == pytest.approx(1.0)  # lambda_max = max_j |X_j'y/n|
    below = grid[grid < 0.8]
    assert path.entry_lambda[1] == pytest.approx(below.max())
    assert path.entry_lambda[0] == pytest.approx(grid[1])  # active right after lambda_max
    assert path.entry_lambda[2] == 0.0


def test_lasso_path_shape_invariants():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(40, 6))
    y = rng.normal(size=40)
    path = lasso_path(X, y)
    assert np.all(np.diff(path.lambda_grid) < 0)
    assert np.all(path.coefficients[0] == 0.0)  # all zero at lambda_max
    on_grid = np.isin(path.entry_lambda, path.lambda_grid)
    assert np.all(on_grid | (path.entry_lambda == 0.0))


def test_lasso_kkt_conditions_hold_along_path():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(50, 8))
    y = X[:, 0] * 2.0 - X[:, 3] + rng.normal(size=50)
    path = lasso_path(X, y)
    Xc = X - X.mean(axis=0)
    scale = np.sqrt(np.mean(Xc * Xc, axis=0))
    Xs = Xc / scale
    yc = y - y.mean()
    for i in [0, 25, 50, 75, 99]:
        lam = path.lambda_grid[i]
        beta_std = path.coefficients[i] * scale
        grad = Xs.T @ (yc - Xs @ beta_std) / X.shape[0]
        active = beta_std != 0.0
        if np.any(active):
            assert np.max(np.abs(grad[active] - lam * np.sign(beta_std[active]))) <= 1e-6
        if np.any(~active):
            assert np.max(np.abs(grad[~active])) <= lam + 1e-6


def test_lasso_objective_non_increasing_within_lambda():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(35, 5))
    y = rng.normal(size=35)
    path = lasso_path(X, y, GridSpec(n_lambdas=20), record_objective=True)
    for trace in path.objective_trace:
        assert np.all(np.diff(trace) <= 1e-10)


def test_lasso_grid_validation():
    X = np.random.default_rng(7).normal(size=(10, 2))
    y = np.arange(10.0)
    with pytest.raises(ValueError):
        lasso_path(X, y, GridSpec(lambdas=np.array([0.1, 0.5])))  # not decreasing
    with pytest.raises(ValueError):
        lasso_path(X, y, GridSpec(lambdas=np.array([0.5, -0.1])))
    single = lasso_path(X, y, GridSpec(n_lambdas=1))
    assert single.lambda_grid.size == 1


# ---------------------------------------------------------------------------
# cv_select_lambda


def test_cv_pure_noise_selects_sparse_model():
    rng = np.random.default_rng(8)
    X = rng.normal(size=(40, 10))
    y = rng.normal(size=40)
    fit = cv_select_lambda(X, y, folds=10, seed=0)
    assert np.count_nonzero(fit.coefficients) <= 5


def test_cv_strong_signal_is_recovered():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(60, 6))
    y = 5.0 * X[:, 0] + 0.1 * rng.normal(size=60)
    fit = cv_select_lambda(X, y, folds=10, seed=0)
    assert fit.coefficients[0] > 0.0
    assert fit.lambda_selected in fit.cv_error_curve.lambda_grid


def test_cv_leave_one_out_boundary():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(5, 2))
    y = rng.normal(size=5)
    fit = cv_select_lambda(X, y, folds=5, seed=1)
    assert fit.lambda_selected in fit.cv_error_curve.lambda_grid


def test_cv_is_deterministic_given_seed():
    rng = np.random.default_rng(11)
    X = rng.normal(size=(30, 4))
    y = X[:, 1] + rng.normal(size=30)
    a = cv_select_lambda(X, y, folds=5, seed=42)
    b = cv_select_lambda(X, y, folds=5, seed=42)
    assert a.lambda_selected == b.lambda_selected
    assert np.array_equal(a.coefficients, b.coefficients)


def test_cv_rejects_bad_fold_count():
    X = np.random.default_rng(12).normal(size=(10, 2))
    with pytest.raises(ValueError):
        cv_select_lambda(X, np.arange(10.0), folds=1)
    with pytest.raises(ValueError):
        cv_select_lambda(X, np.arange(10.0), folds=11)


# ---------------------------------------------------------------------------
# elastic_net_fit


def test_enet_mixing_one_reduces_to_lasso():
    rng = np.random.default_rng(13)
    X = rng.normal(size=(40, 5))
    y = X[:, 0] - 2.0 * X[:, 2] + rng.normal(size=40)
    enet = elastic_net_fit(X, y, mixing=1.0, folds=5, seed=3)
    lasso = cv_select_lambda(X, y, folds=5, seed=3)
    assert enet.lambda_selected == pytest.approx(lasso.lambda_selected)
    assert np.max(np.abs(enet.coefficients - lasso.coefficients)) < 1e-6


def test_enet_mixing_zero_orthonormal_ridge_form():
    n, p = 32, 3
    X = orthonormal_design(n, p)
    c = np.array([1.0, 0.5, -0.8])
    y = X @ c
    lam = 0.4
    fit = elastic_net_fit(X, y, mixing=0.0, folds=4, seed=0,
                          grid=GridSpec(lambdas=np.array([lam])))
    assert np.allclose(fit.coefficients, c / (1.0 + 2.0 * lam), atol=1e-6)


def test_enet_zero_response():
    X = np.random.default_rng(14).normal(size=(20, 3))
    fit = elastic_net_fit(X, np.zeros(20), mixing=0.5, folds=4, seed=0)
    assert np.all(fit.coefficients == 0.0)


def test_enet_rejects_mixing_out_of_range():
    X = np.random.default_rng(15).normal(size=(10, 2))
    with pytest.raises(ValueError):
        elastic_net_fit(X, np.arange(10.0), mixing=1.5)


# ---------------------------------------------------------------------------
# group_lasso_path


def test_group_singletons_match_lasso():
    rng = np.random.default_rng(16)
    X = rng.normal(size=(10, 6))
    y = X[:, 0] + rng.normal(size=10) * 0.5
    groups = GroupSpec(assignments=np.arange(1, 7), group_count=6)
    gpath = group_lasso_path(X, y, groups)
    lpath = lasso_path(X, y)
    assert np.allclose(gpath.lambda_grid, lpath.lambda_grid)
    # same selected set at every penalty, and entry points within one grid step
    for i in range(gpath.lambda_grid.size):
        assert np.array_equal(gpath.coefficients[i] != 0, lpath.coefficients[i] != 0)
    step = lpath.lambda_grid[0] / lpath.lambda_grid[1]
    for ge, le in zip(gpath.entry_lambda, lpath.entry_lambda):
        if ge == 0.0 or le == 0.0:
            assert ge == le
        else:
            ratio = max(ge, le) / min(ge, le)
            assert ratio <= step * (1.0 + 1e-10)


def test_group_zero_response_all_inactive():
    X = np.random.default_rng(17).normal(size=(20, 4))
    groups = GroupSpec(assignments=np.array([1, 1, 2, 2]), group_count=2)
    path = group_lasso_path(X, np.zeros(20), groups)
    assert np.all(path.coefficients == 0.0)
    assert np.all(path.entry_lambda == 0.0)


def test_group_perfect_group_enters_first():
    rng = np.random.default_rng(18)
    X = rng.normal(size=(60, 6))
    y = X[:, 0] + X[:, 1]  # group 1 is exactly predictive
    groups = GroupSpec(assignments=np.array([1, 1, 2, 2, 3, 3]), group_count=3)
    path = group_lasso_path(X, y, groups)
    entry_by_group = [path.entry_lambda[groups.members(g)][0] for g in (1, 2, 3)]
    assert entry_by_group[0] == max(entry_by_group)
    assert entry_by_group[0] > 0.0
    # entry penalty is broadcast identically to group members
    assert path.entry_lambda[0] == path.entry_lambda[1]


def test_group_entry_lambda_in_input_order():
    rng = np.random.default_rng(19)
    X = rng.normal(size=(40, 4))
    y = X[:, 3] * 3.0 + rng.normal(size=40) * 0.1
    # group ids deliberately not sorted along columns
    groups = GroupSpec(assignments=np.array([2, 1, 2, 1]), group_count=2)
    path = group_lasso_path(X, y, groups)
    assert path.coefficients.shape == (path.lambda_grid.size, 4)
    assert path.entry_lambda[1] == path.entry_lambda[3]  # both in group 1
    assert path.entry_lambda[0] == path.entry_lambda[2]  # both in group 2


def test_group_assignment_length_checked():
    X = np.random.default_rng(20).normal(size=(12, 3))
    groups = GroupSpec(assignments=np.array([1, 2]), group_count=2)
    with pytest.raises(DimensionMismatch):
        group_lasso_path(X, np.arange(12.0), groups)


# ---------------------------------------------------------------------------
# ols_hc3


def test_ols_perfect_fit_zero_ses():
    x = np.arange(8.0)
    y = 2.0 + 3.0 * x
    fit = ols_hc3(x[:, None], y)
    assert fit.coefficients[0] == pytest.approx(3.0, abs=1e-10)
    assert fit.intercept == pytest.approx(2.0, abs=1e-10)
    assert np.allclose(fit.robust_se, 0.0, atol=1e-8)


def test_ols_intercept_only_is_mean():
    y = np.array([1.0, 4.0, 7.0, 2.0])
    fit = ols_hc3(np.empty((4, 0)), y)
    assert fit.intercept == pytest.approx(y.mean())
    assert fit.coefficients.size == 0


def test_ols_six_point_matrix_oracle():
    X = np.array([
        [0.5, -1.2],
        [1.3, 0.4],
        [-0.7, 2.1],
        [2.2, -0.3],
        [-1.1, 1.6],
        [0.9, -2.0],
    ])
    y = np.array([1.0, 2.5, -0.5, 4.0, -1.2, 2.2])
    Z = np.column_stack([np.ones(6), X])
    ZtZ_inv = np.linalg.inv(Z.T @ Z)
    beta = ZtZ_inv @ Z.T @ y
    h = np.diag(Z @ ZtZ_inv @ Z.T)
    e = y - Z @ beta
    w = (e / (1.0 - h)) ** 2
    cov = ZtZ_inv @ (Z * w[:, None]).T @ Z @ ZtZ_inv
    se = np.sqrt(np.diag(cov))
    fit = ols_hc3(X, y)
    assert np.allclose(fit.coefficients, beta[1:], atol=1e-8)
    assert fit.intercept == pytest.approx(beta[0], abs=1e-8)
    assert np.allclose(fit.robust_se, se[1:], atol=1e-8)


def test_ols_column_reordering_invariance():
    rng = np.random.default_rng(21)
    X = rng.normal(size=(25, 4))
    y = X @ np.array([1.0, -2.0, 0.5, 0.0]) + rng.normal(size=25)
    perm = np.array([2, 0, 3, 1])
    a = ols_hc3(X, y)
    b = ols_hc3(X[:, perm], y)
    assert np.allclose(a.coefficients[perm], b.coefficients, atol=1e-10)
    assert np.allclose(a.robust_se[perm], b.robust_se, atol=1e-10)
    assert a.intercept == pytest.approx(b.intercept, abs=1e-10)


def test_ols_leverage_one_detected():
    X = np.array([[0.0], [0.0], [0.0], [1.0]])
    y = np.array([1.0, 2.0, 3.0, 4.0])
    with pytest.raises(LeverageOne):
        ols_hc3(X, y)


def test_ols_singular_design_rejected():
    x = np.random.default_rng(22).normal(size=5)
    X = np.column_stack([x, x])
    with pytest.raises(SingularDesign):
        ols_hc3(X, np.arange(5.0))


def test_ols_too_few_rows():
    with pytest.raises(TooFewRows):
        ols_hc3(np.eye(3), np.arange(3.0))
