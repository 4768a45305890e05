"""Feature statistics (LCD / LSM / group LSM) and the selection threshold."""

import numpy as np
import pytest
import scipy.linalg

from robustko.errors import DimensionMismatch, EmptyStats
from robustko.filtering import (
    FeatureStats,
    fdp_hat,
    group_lsm_statistics,
    knockoff_threshold,
    lcd_statistics,
    lsm_statistics,
)
from robustko.knockoffs import GroupSpec, fit_knockoff_model, sample_knockoffs
from robustko.regression import FitResult, GridSpec, LassoPath, lasso_path


def orthonormal_design(n, q):
    H = scipy.linalg.helmert(n)
    return np.sqrt(n) * H[:q].T


def path_with_entries(entry_lambda):
    """Minimal LassoPath carrying only the entry penalties the statistics read."""
    entry_lambda = np.asarray(entry_lambda, dtype=np.float64)
    q = entry_lambda.size
    return LassoPath(
        lambda_grid=np.array([1.0, 0.5]),
        coefficients=np.zeros((2, q)),
        entry_lambda=entry_lambda,
        intercept_per_lambda=np.zeros(2),
    )


# ---------------------------------------------------------------------------
# LCD


def test_lcd_tie_and_inactive_knockoff():
    fit = FitResult(coefficients=np.array([0.5, 0.7, 0.5, 0.0]), intercept=0.0)
    stats = lcd_statistics(fit, p=2)
    assert stats.kind == "lcd"
    assert stats.w[0] == 0.0  # symmetric tie
    assert stats.w[1] == pytest.approx(0.7)  # inactive knockoff


def test_lcd_orthonormal_soft_threshold_values():
    n, p = 32, 4
    X_joint = orthonormal_design(n, 2 * p)
    c = np.array([1.0, 0.5, 0.7, 0.4, 0.2, 0.5, 0.0, 0.9])
    y = X_joint @ c
    path = lasso_path(X_joint, y, GridSpec(lambdas=np.array([0.5, 0.1])))
    beta, intercept = path.coefficients_at(0.1)
    fit = FitResult(coefficients=beta, intercept=intercept, lambda_selected=0.1)
    stats = lcd_statistics(fit, p)
    expected = np.array([0.9 - 0.1, 0.0, 0.6 - 0.0, 0.3 - 0.8])
    assert np.allclose(stats.w, expected, atol=1e-6)
    assert stats.lambda0 == pytest.approx(0.1)


def test_lcd_checks_width():
    fit = FitResult(coefficients=np.arange(5.0), intercept=0.0)
    with pytest.raises(DimensionMismatch):
        lcd_statistics(fit, p=3)


# ---------------------------------------------------------------------------
# LSM


def test_lsm_signed_max_formula():
    path = path_with_entries([0.8, 0.3, 0.5, 0.3, 0.8, 0.5])
    stats = lsm_statistics(path, p=3)
    assert stats.w[0] == pytest.approx(0.8)
    assert stats.w[1] == pytest.approx(-0.8)
    assert stats.w[2] == 0.0  # exact tie: sign(0) = 0


def test_lsm_checks_width():
    with pytest.raises(DimensionMismatch):
        lsm_statistics(path_with_entries([0.5, 0.2, 0.1]), p=2)


# ---------------------------------------------------------------------------
# group LSM


def test_group_lsm_cases():
    groups = GroupSpec(assignments=np.array([1, 1, 2, 3]), group_count=3)
    # columns: [g1, g1, g2, g3 | twins in the same order]
    entries = [0.6, 0.6, 0.0, 0.4, 0.0, 0.0, 0.0, 0.7]
    stats = group_lsm_statistics(path_with_entries(entries), groups)
    assert stats.kind == "group_lsm"
    assert np.allclose(stats.w[:2], 0.6)  # broadcast within the group
    assert stats.w[2] == 0.0  # never active on either side
    assert stats.w[3] == pytest.approx(-0.7)  # twin enters first


def test_group_lsm_checks_width():
    groups = GroupSpec(assignments=np.array([1, 2]), group_count=2)
    with pytest.raises(DimensionMismatch):
        group_lsm_statistics(path_with_entries([0.1, 0.2]), groups)


# ---------------------------------------------------------------------------
# threshold


def brute_force_threshold(w, alpha, plus):
    best = None
    for t in np.unique(np.abs(w[w != 0.0])):
        neg = np.count_nonzero(w <= -t)
        pos = np.count_nonzero(w >= t)
        if (neg + (1 if plus else 0)) / max(1, pos) <= alpha:
            best = t
            break
    return best


def test_threshold_all_positive_selects_everything():
    res = knockoff_threshold(np.array([3.0, 2.0, 1.0]), alpha=0.5)
    assert res.threshold == 1.0
    assert np.array_equal(res.selected, [0, 1, 2])
    assert res.fdp_estimate == 0.0


def test_threshold_mixed_signs_matches_candidate_scan():
    w = np.array([5.0, 4.0, -3.0, 2.0, -1.0])
    res = knockoff_threshold(w, alpha=0.5)
    assert res.threshold == brute_force_threshold(w, 0.5, plus=False)
    assert np.array_equal(res.selected, [0, 1, 3])
    assert np.array_equal(res.selected, np.flatnonzero(w >= res.threshold))
    assert res.fdp_estimate == pytest.approx(1.0 / 3.0)


def test_threshold_all_negative_is_empty():
    res = knockoff_threshold(np.array([-2.0, -1.0, -0.5]), alpha=0.9)
    assert res.threshold == np.inf
    assert res.selected.size == 0
    assert res.fdp_estimate == 0.0


def test_threshold_plus_variant_is_stricter():
    w = np.array([2.0, 1.0, -1.0])
    plain = knockoff_threshold(w, alpha=0.5, plus_variant=False)
    plus = knockoff_threshold(w, alpha=0.5, plus_variant=True)
    assert plain.threshold == 1.0
    assert np.array_equal(plain.selected, [0, 1])
    assert plus.threshold == np.inf  # (1+1)/2 and (1+0)/1 both exceed 0.5
    assert plus.selected.size == 0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_threshold_matches_brute_force_on_random_stats(seed):
    w = np.round(np.random.default_rng(seed).normal(size=40), 2)
    for alpha in (0.1, 0.25, 0.5, 1.0):
        for plus in (False, True):
            res = knockoff_threshold(w, alpha=alpha, plus_variant=plus)
            expected = brute_force_threshold(w, alpha, plus)
            if expected is None:
                assert res.threshold == np.inf and res.selected.size == 0
            else:
                assert res.threshold == expected
                assert np.array_equal(res.selected, np.flatnonzero(w >= expected))


def test_threshold_monotone_in_alpha():
    w = np.random.default_rng(3).normal(size=60)
    prev = knockoff_threshold(w, alpha=0.05)
    for alpha in (0.1, 0.2, 0.4, 0.8):
        cur = knockoff_threshold(w, alpha=alpha)
        assert cur.threshold <= prev.threshold
        assert set(prev.selected).issubset(set(cur.selected))
        prev = cur


def test_threshold_input_validation():
    with pytest.raises(EmptyStats):
        knockoff_threshold(np.array([]), alpha=0.2)
    with pytest.raises(ValueError):
        knockoff_threshold(np.array([1.0, np.nan]), alpha=0.2)
    with pytest.raises(ValueError):
        knockoff_threshold(np.array([1.0]), alpha=0.0)
    with pytest.raises(ValueError):
        knockoff_threshold(np.array([1.0]), alpha=1.5)


def test_threshold_accepts_feature_stats():
    stats = FeatureStats(w=np.array([2.0, -1.0, 3.0]), kind="lcd")
    res = knockoff_threshold(stats, alpha=1.0)
    assert res.nominal_fdr == 1.0
    assert res.selected.size > 0


# ---------------------------------------------------------------------------
# fdp_hat


def test_fdp_hat_values():
    assert fdp_hat(np.array([1.0, 1.0, 1.0]), 1.0) == 0.0
    assert fdp_hat(np.array([2.0, -2.0]), 2.0) == 1.0
    # raw ratio with a floored denominator; no empty-selection convention here
    assert fdp_hat(np.array([-1.0, -2.0]), 1.0) == 2.0


def test_fdp_hat_requires_positive_t():
    with pytest.raises(ValueError):
        fdp_hat(np.array([1.0]), 0.0)


# ---------------------------------------------------------------------------
# antisymmetry under column/knockoff swap


def test_swap_flips_statistic_sign():
    rng = np.random.default_rng(23)
    n, p = 80, 4
    X = rng.normal(size=(n, p))
    y = 2.0 * X[:, 0] - X[:, 2] + rng.normal(size=n)
    model = fit_knockoff_model(X, method="equi")
    Xk = sample_knockoffs(X, model, seed=7)
    joint = np.hstack([X, Xk])
    swapped = joint.copy()
    j = 0
    swapped[:, [j, j + p]] = swapped[:, [j + p, j]]

    lam = 0.05
    grid = GridSpec(lambdas=np.array([0.2, lam]))
    for make_w in (
        lambda J: lcd_statistics(
            FitResult(*_fit_at(J, y, grid, lam)), p
        ).w,
        lambda J: lsm_statistics(lasso_path(J, y), p).w,
    ):
        w = make_w(joint)
        w_swapped = make_w(swapped)
        assert w_swapped[j] == pytest.approx(-w[j], abs=1e-6)
        others = np.delete(np.arange(p), j)
        assert np.allclose(w_swapped[others], w[others], atol=1e-6)


def _fit_at(J, y, grid, lam):
    path = lasso_path(J, y, grid)
    beta, intercept = path.coefficients_at(lam)
    return beta, intercept, lam
