"""Knockoff-quality diagnostics built from two-sample and moment losses.

These metrics score any (X, knockoff) pair regardless of how the knockoffs
were produced: a Gaussian-kernel maximum mean discrepancy on swapped halves
of the sample, a second-order moment loss comparing the original and
knockoff covariance blocks, and a decorrelation loss measuring how far each
cross-correlation diag entry sits from its target 1 - s*.  Lower is better;
exact knockoff copies of the distribution drive every term toward zero
while distorted constructions inflate at least one of them.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, NonFiniteInput, TooFewRows
from .knockoffs import estimate_moments, solve_s_asdp

__all__ = [
    "DiagnosticsConfig",
    "JointCovariance",
    "joint_sample_covariance",
    "swap",
    "gaussian_mmd",
    "j_mmd",
    "j_second_order",
    "j_decorrelation",
    "total_j",
]


@dataclass
class DiagnosticsConfig:
    """Loss weights, kernel bandwidth policy, and the swap/partition seed."""

    gamma: float = 1.0
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 1.0
    delta: float = 1.0
    bandwidth: Union[str, float] = "median"
    swap_seed: int = 0

    def __post_init__(self):
        for name in ("gamma", "lambda1", "lambda2", "lambda3", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "median":
                raise ValueError("bandwidth must be 'median' or a positive number")
        elif not self.bandwidth > 0:
            raise ValueError("fixed bandwidth must be positive")


@dataclass
class JointCovariance:
    """Sample covariance of the stacked (X, knockoff) columns plus the
    zero-diagonal mask used by the off-diagonal moment term."""

    G: np.ndarray  # 2p x 2p
    M: np.ndarray  # p x p, ones off the diagonal


def _pair(X, Xk):
    X = np.asarray(X, dtype=np.float64)
    Xk = np.asarray(Xk, dtype=np.float64)
    if X.shape != Xk.shape or X.ndim != 2:
        raise DimensionMismatch("X and its knockoff matrix must share one 2-D shape")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Xk))):
        raise NonFiniteInput("diagnostic inputs contain non-finite values")
    return X, Xk


def joint_sample_covariance(X, Xk) -> JointCovariance:
    X, Xk = _pair(X, Xk)
    p = X.shape[1]
    G = np.cov(np.hstack([X, Xk]).T, ddof=1)
    G = np.atleast_2d(G)
    M = np.ones((p, p)) - np.eye(p)
    return JointCovariance(G=G, M=M)


def swap(X, Xk, swap_set: Sequence[int]) -> np.ndarray:
    """Stack [X, Xk] with the columns in ``swap_set`` exchanged between blocks."""
    X, Xk = _pair(X, Xk)
    p = X.shape[1]
    s = np.asarray(swap_set, dtype=np.int64).reshape(-1)
    if s.size and (s.min() < 0 or s.max() >= p):
        raise IndexOutOfRange(f"swap indices must lie in [0, {p})")
    left, right = X.copy(), Xk.copy()
    left[:, s], right[:, s] = Xk[:, s], X[:, s]
    return np.hstack([left, right])


def _median_bandwidth(A: np.ndarray, B: np.ndarray, d2_aa, d2_bb, d2_ab) -> float:
    na, nb = A.shape[0], B.shape[0]
    iu_a = np.triu_indices(na, k=1)
    iu_b = np.triu_indices(nb, k=1)
    pooled = np.concatenate([d2_aa[iu_a], d2_bb[iu_b], d2_ab.ravel()])
    med = float(np.median(np.sqrt(np.clip(pooled, 0.0, None))))
    return med if med > 0 else 1.0


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.sum(A * A, axis=1)
    bb = np.sum(B * B, axis=1)
    return np.clip(aa[:, None] + bb[None, :] - 2.0 * (A @ B.T), 0.0, None)


def gaussian_mmd(A, B, bandwidth: Union[str, float] = "median") -> float:
    """Biased (V-statistic) MMD with kernel exp(-||u-v||^2 / (2 sigma^2)).

    ``bandwidth="median"`` sets sigma to the median pairwise distance over
    the pooled samples; identical inputs give exactly zero.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch("samples must share a column count")
    if A.shape[0] < 2 or B.shape[0] < 2:
        raise TooFewRows("need at least two rows per sample")
    d2_aa, d2_bb, d2_ab = _sq_dists(A, A), _sq_dists(B, B), _sq_dists(A, B)
    if bandwidth == "median":
        sigma = _median_bandwidth(A, B, d2_aa, d2_bb, d2_ab)
    else:
        sigma = float(bandwidth)
    g = 1.0 / (2.0 * sigma * sigma)
    value = (
        float(np.mean(np.exp(-g * d2_aa)))
        + float(np.mean(np.exp(-g * d2_bb)))
        - 2.0 * float(np.mean(np.exp(-g * d2_ab)))
    )
    return value


def j_mmd(
    X,
    Xk,
    config: Optional[DiagnosticsConfig] = None,
    swap_set: Optional[Sequence[int]] = None,
) -> float:
    """Two-sample MMD loss on a seeded half partition of the rows.

    Both rows halves are stacked with their knockoffs; the first term
    compares half one against half two with the blocks fully exchanged, the
    second against half two with a random coin-flip column subset swapped.
    Odd row counts drop the trailing row.  Deterministic given
    ``config.swap_seed`` (which also seeds the partition).
    """
    config = config or DiagnosticsConfig()
    X, Xk = _pair(X, Xk)
    n, p = X.shape
    n_even = n - (n % 2)
    if n_even < 4:
        raise TooFewRows("need at least four rows for the half partition")
    X, Xk = X[:n_even], Xk[:n_even]
    rng = np.random.default_rng(config.swap_seed)
    perm = rng.permutation(n_even)
    half = n_even // 2
    one, two = perm[:half], perm[half:]
    if swap_set is None:
        swap_set = np.flatnonzero(rng.random(p) < 0.5)
    joint_one = np.hstack([X[one], Xk[one]])
    flipped_two = np.hstack([Xk[two], X[two]])
    swapped_two = swap(X[two], Xk[two], swap_set)
    term1 = gaussian_mmd(joint_one, flipped_two, bandwidth=config.bandwidth)
    term2 = gaussian_mmd(joint_one, swapped_two, bandwidth=config.bandwidth)
    return term1 + term2


def j_second_order(
    X,
    Xk,
    lambda1: float = 1.0,
    lambda2: float = 1.0,
    lambda3: float = 1.0,
    corrected_variant: bool = False,
) -> float:
    """Second-order moment loss between the original and knockoff blocks.

    Three terms on the joint sample covariance G: the full and the
    off-diagonal squared Frobenius mismatch between G_XX and G_kk (both
    relative to ||G_XX||^2), and the squared column-mean gap scaled by
    lambda3 / p.  ``corrected_variant`` replaces the off-diagonal term with
    the off-diagonal energy of the cross block G_Xk instead — a stricter
    reading that penalizes residual cross-correlation directly.
    """
    X, Xk = _pair(X, Xk)
    p = X.shape[1]
    jc = joint_sample_covariance(X, Xk)
    G_xx = jc.G[:p, :p]
    G_kk = jc.G[p:, p:]
    G_xk = jc.G[:p, p:]
    denom = float(np.sum(G_xx * G_xx))
    if denom == 0.0:
        denom = 1.0
    diff = G_xx - G_kk
    t1 = lambda1 * float(np.sum(diff * diff)) / denom
    off = jc.M * (G_xk if corrected_variant else diff)
    t2 = lambda2 * float(np.sum(off * off)) / denom
    mean_gap = X.mean(axis=0) - Xk.mean(axis=0)
    t3 = (lambda3 / p) * float(np.sum(mean_gap * mean_gap))
    return t1 + t2 + t3


def j_decorrelation(X, Xk, s_star: Optional[np.ndarray] = None) -> float:
    """Squared gap between the cross-correlation diagonal and its target 1 - s*.

    corr(x_j, knockoff_j) should equal 1 - s*_j for the decorrelation
    amounts s* the blockwise solver would assign to the sample correlation
    of X; ``s_star=None`` computes exactly that.
    """
    X, Xk = _pair(X, Xk)
    n, p = X.shape
    if s_star is None:
        s_star = solve_s_asdp(estimate_moments(X, shrinkage=None).covariance)
    s_star = np.asarray(s_star, dtype=np.float64).reshape(-1)
    if s_star.shape[0] != p:
        raise DimensionMismatch("s_star must have one entry per column")
    zx = X - X.mean(axis=0)
    zk = Xk - Xk.mean(axis=0)
    sx = zx.std(axis=0, ddof=1)
    sk = zk.std(axis=0, ddof=1)
    scale = np.where((sx > 0) & (sk > 0), sx * sk, 1.0)
    cross_diag = np.sum(zx * zk, axis=0) / ((n - 1) * scale)
    gap = cross_diag - 1.0 + s_star
    return float(np.sum(gap * gap))


def total_j(
    X,
    Xk,
    config: Optional[DiagnosticsConfig] = None,
    s_star: Optional[np.ndarray] = None,
) -> float:
    """Weighted sum gamma*J_mmd + J_second_order + delta*J_decorrelation."""
    config = config or DiagnosticsConfig()
    value = 0.0
    if config.gamma > 0:
        value += config.gamma * j_mmd(X, Xk, config)
    value += j_second_order(X, Xk, config.lambda1, config.lambda2, config.lambda3)
    if config.delta > 0:
        value += config.delta * j_decorrelation(X, Xk, s_star=s_star)
    return value
