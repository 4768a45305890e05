"""Second-order Gaussian model-X knockoffs and group knockoffs.

Given a feature matrix X with mean mu and covariance Sigma, a second-order
knockoff copy is drawn from the conditional Gaussian law

    Xk | X  ~  N( X - (X - mu) Sigma^{-1} S,  2 S - S Sigma^{-1} S )

where S is diagonal ``diag(s)`` for individual knockoffs or block-diagonal
for group knockoffs.  The joint covariance of (X, Xk),

    G = [[Sigma, Sigma - S], [Sigma - S, Sigma]],

is positive semi-definite exactly when S >= 0 and 2*Sigma - S >= 0; the s
solvers in this module maximize decorrelation subject to that constraint.
All solver work happens on the correlation scale (so 0 <= s_j <= 1) and the
sampled knockoffs are rescaled back to the original units.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    BlockSolveDiverged,
    DimensionMismatch,
    EmptyGroup,
    NonFiniteInput,
    NotPsd,
    NotUnitDiagonal,
    TooFewRows,
    ZeroVarianceColumn,
)

__all__ = [
    "MomentEstimate",
    "KnockoffModel",
    "GroupSpec",
    "estimate_moments",
    "solve_s_equi",
    "solve_s_asdp",
    "solve_s_group",
    "fit_knockoff_model",
    "fit_group_knockoff_model",
    "sample_knockoffs",
    "sample_group_knockoffs",
    "joint_covariance",
]


@dataclass
class MomentEstimate:
    """First and second moments of the features, kept on the correlation scale.

    Attributes
    ----------
    mean : (p,) column means in the original units.
    covariance : (p, p) symmetric PSD matrix on the correlation scale
        (unit diagonal before shrinkage; shrinkage preserves it).
    shrinkage_intensity : amount of shrinkage toward the identity, in [0, 1].
    correlation_scale : (p,) column standard deviations used to map between
        the original units and the correlation scale.
    """

    mean: np.ndarray
    covariance: np.ndarray
    shrinkage_intensity: float
    correlation_scale: np.ndarray


@dataclass
class GroupSpec:
    """Partition of the p variables into contiguous group ids 1..group_count."""

    assignments: np.ndarray
    group_count: int
    names: Optional[list] = None

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        self.assignments = a
        if a.ndim != 1 or a.size == 0:
            raise DimensionMismatch("assignments must be a nonempty 1-d vector")
        present = np.unique(a)
        expected = np.arange(1, self.group_count + 1)
        if present.size != self.group_count or np.any(present != expected):
            missing = sorted(set(expected.tolist()) - set(present.tolist()))
            if missing:
                raise EmptyGroup(f"groups {missing} have no member variables")
            raise DimensionMismatch(
                "group identifiers must be exactly the contiguous range "
                f"1..{self.group_count}, got {present.tolist()}"
            )
        if self.names is not None and len(self.names) != self.group_count:
            raise DimensionMismatch("names must have one label per group")

    def members(self, group_id: int) -> np.ndarray:
        """0-based column indices belonging to ``group_id`` (1-based id)."""
        return np.flatnonzero(self.assignments == group_id)


@dataclass
class KnockoffModel:
    """A fitted knockoff sampler: moments, decorrelation amounts, and the
    precomputed conditional maps.

    ``conditional_mean_map`` is S Sigma^{-1} (p x p) and
    ``conditional_cov_factor`` a lower-triangular L with
    L L' = 2S - S Sigma^{-1} S, both on the correlation scale.  ``s`` is the
    diagonal of S (the full S equals diag(s) except for group models, whose
    block-diagonal S is recoverable from gamma and the group covariance).
    """

    moments: MomentEstimate
    s: np.ndarray
    method: str  # "equi" | "asdp" | "group_equi"
    conditional_mean_map: np.ndarray
    conditional_cov_factor: np.ndarray
    block_size: Optional[int] = None
    groups: Optional[GroupSpec] = None
    gamma: Optional[float] = None


# ---------------------------------------------------------------------------
# moment estimation


def estimate_moments(X, shrinkage: Optional[str] = "ridge",
                     ridge_eps: float = 0.01) -> MomentEstimate:
    """Sample mean and correlation-scale covariance with optional shrinkage.

    Parameters
    ----------
    X : (n, p) data matrix, n >= 2, no constant columns.
    shrinkage : None for the raw sample correlation, ``"ridge"`` for
        (R + eps*I)/(1 + eps) with eps = ridge_eps * mean diagonal, or
        ``"ledoit"`` for identity-target shrinkage with a plug-in intensity.
        The default ridge keeps Sigma^{-1} well defined on near-singular
        designs.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected 2-d data, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("data matrix contains non-finite entries")
    n, p = X.shape
    if n < 2:
        raise TooFewRows("need at least 2 rows to estimate moments")
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    bad = np.flatnonzero(sd == 0.0)
    if bad.size:
        raise ZeroVarianceColumn(int(bad[0]))
    Z = (X - mean) / sd
    R = (Z.T @ Z) / (n - 1)
    np.fill_diagonal(R, 1.0)
    intensity = 0.0
    if shrinkage is None:
        pass
    elif shrinkage == "ridge":
        eps = ridge_eps * float(np.mean(np.diag(R)))
        R = (R + eps * np.eye(p)) / (1.0 + eps)
        intensity = eps / (1.0 + eps)
    elif shrinkage == "ledoit":
        # identity-target shrinkage; the plug-in intensity compares the
        # dispersion of per-row outer products to the distance from the target
        d2 = float(np.sum((R - np.eye(p)) ** 2))
        if d2 > 0.0:
            # sum_i ||z_i z_i' - R||_F^2 expanded to avoid forming n outer products
            sq_norms = np.sum(Z * Z, axis=1)
            quad = np.einsum("ij,jk,ik->i", Z, R, Z)
            b2 = (np.sum(sq_norms**2) - 2.0 * np.sum(quad) + n * np.sum(R * R)) / (n * n)
            intensity = min(1.0, max(0.0, float(b2) / d2))
        R = (1.0 - intensity) * R + intensity * np.eye(p)
    else:
        raise ValueError(f"unknown shrinkage {shrinkage!r}")
    R = (R + R.T) / 2.0
    return MomentEstimate(mean=mean, covariance=R,
                          shrinkage_intensity=float(intensity),
                          correlation_scale=sd)


# ---------------------------------------------------------------------------
# s solvers


def _check_correlation(Sigma) -> np.ndarray:
    Sigma = np.asarray(Sigma, dtype=np.float64)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise DimensionMismatch("Sigma must be square")
    if not np.allclose(Sigma, Sigma.T, atol=1e-10):
        raise NotPsd("Sigma must be symmetric")
    if not np.allclose(np.diag(Sigma), 1.0, atol=1e-8):
        raise NotUnitDiagonal("Sigma must have a unit diagonal (correlation scale)")
    w = scipy.linalg.eigvalsh(Sigma)
    if w[0] < -1e-8 * max(w[-1], 1.0):
        raise NotPsd(f"Sigma has eigenvalue {w[0]:.3e} < 0")
    return Sigma


def solve_s_equi(Sigma) -> np.ndarray:
    """Equicorrelated construction: the constant vector min(1, 2*lambda_min).

    The closed form makes every Corr(X_j, Xk_j) equal; it is the cheapest
    valid s and the baseline the ASDP solver must dominate.
    """
    Sigma = _check_correlation(Sigma)
    lam_min = float(scipy.linalg.eigvalsh(Sigma)[0])
    s_val = min(1.0, max(0.0, 2.0 * lam_min))
    return np.full(Sigma.shape[0], s_val)


def _block_ascent(Sb: np.ndarray, max_iter: int = 500, tol: float = 1e-8) -> np.ndarray:
    """Maximize sum(s) subject to 0 <= s <= 1 and 2*Sb - diag(s) >= 0.

    Damped Jacobi ascent: every coordinate's feasible headroom against the
    current M = 2*Sb - diag(s) is 1/(M^{-1})_jj, and a simultaneous step of
    eta = 1/p_block times the headroom keeps M PSD (the trace bound
    sum_j c_j (M^{-1})_jj <= 1 guarantees M - diag(c) >= 0).  The symmetric
    update converges to the constant 2*lambda_min solution on exchangeable
    blocks instead of letting early coordinates overshoot it.  A final
    Gauss-Seidel pass snaps box-bound coordinates to exactly 1.
    """
    pb = Sb.shape[0]
    if pb == 1:
        return np.ones(1)
    s = np.zeros(pb)
    eta = 1.0 / pb
    M2 = 2.0 * Sb

    def headroom(svec):
        w, V = scipy.linalg.eigh(M2 - np.diag(svec))
        wmax = max(float(w[-1]), 1e-300)
        w = np.clip(w, wmax * 1e-14, None)
        minv_diag = ((V * V) / w).sum(axis=1)
        return 1.0 / minv_diag

    for _ in range(max_iter):
        head = headroom(s)
        if not np.all(np.isfinite(head)):
            raise BlockSolveDiverged("non-finite headroom in block ascent")
        target = np.minimum(1.0, s + head)
        s_new = s + eta * (target - s)
        gain = float(np.sum(s_new - s))
        if gain < 0.0:
            raise BlockSolveDiverged("block ascent objective decreased")
        s = s_new
        if gain < tol:
            break
    # one sequential polish pass: exact per-coordinate headroom, shaved a hair
    # to stay strictly feasible; the global gamma scaling is the safety net
    for j in range(pb):
        head = headroom(s)
        s[j] = min(1.0, s[j] + max(0.0, head[j]) * (1.0 - 1e-12))
    return np.clip(s, 0.0, 1.0)


def _largest_gamma(Sigma: np.ndarray, D: np.ndarray) -> float:
    """Largest gamma in [0, 1] with 2*Sigma - gamma*D PSD (D PSD)."""
    w = scipy.linalg.eigvalsh(2.0 * Sigma - D)
    if w[0] >= -1e-12:
        return 1.0
    try:
        # generalized problem 2*Sigma v = gamma D v gives the exact boundary
        gen = scipy.linalg.eigh(2.0 * Sigma, D, eigvals_only=True)
        gamma = float(gen[0])
        if math.isfinite(gamma) and gamma > 0:
            gamma = min(1.0, gamma)
            if scipy.linalg.eigvalsh(2.0 * Sigma - gamma * D)[0] >= -1e-10:
                return gamma
    except scipy.linalg.LinAlgError:
        pass
    lo, hi = 0.0, 1.0  # gamma = 0 is feasible since Sigma is PSD
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if scipy.linalg.eigvalsh(2.0 * Sigma - mid * D)[0] >= -1e-12:
            lo = mid
        else:
            hi = mid
    return lo


def solve_s_asdp(Sigma, block_size: int = 10) -> np.ndarray:
    """Approximate SDP: blockwise maximization of sum(s), then global scaling.

    Variables are ordered by average absolute correlation and cut into
    contiguous blocks of at most ``block_size``; each block maximizes its
    sum(s) under the block PSD constraint via projected coordinate ascent,
    and the concatenated vector is scaled by the largest gamma in [0, 1]
    keeping 2*Sigma - gamma*diag(s) PSD.
    """
    Sigma = _check_correlation(Sigma)
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    p = Sigma.shape[0]
    avg_abs = (np.abs(Sigma).sum(axis=1) - 1.0) / max(p - 1, 1)
    order = np.argsort(-avg_abs, kind="stable")
    n_blocks = math.ceil(p / block_size)
    blocks = np.array_split(order, n_blocks)
    s_perm = np.empty(p)
    pos = 0
    for blk in blocks:
        Sb = Sigma[np.ix_(blk, blk)]
        s_perm[pos:pos + blk.size] = _block_ascent(Sb)
        pos += blk.size
    s = np.empty(p)
    s[np.concatenate(blocks)] = s_perm
    gamma = _largest_gamma(Sigma, np.diag(s))
    return s * gamma


def solve_s_group(Sigma, groups: GroupSpec) -> tuple[np.ndarray, float]:
    """Group-equicorrelated S = gamma * blockdiag(Sigma_gg).

    Returns the full (p, p) matrix S and the largest feasible gamma in
    [0, 1]; with independent groups or a single all-encompassing group the
    constraint 2*Sigma - S >= 0 already holds at gamma = 1.
    """
    Sigma = _check_correlation(Sigma)
    p = Sigma.shape[0]
    if groups.assignments.shape[0] != p:
        raise DimensionMismatch("group assignments do not match Sigma's size")
    B = np.zeros_like(Sigma)
    for g in range(1, groups.group_count + 1):
        idx = groups.members(g)
        B[np.ix_(idx, idx)] = Sigma[np.ix_(idx, idx)]
    gamma = _largest_gamma(Sigma, B)
    return gamma * B, gamma


def joint_covariance(Sigma, S) -> np.ndarray:
    """Assemble the 2p x 2p joint covariance G of (X, Xk).

    ``S`` may be a length-p vector (diagonal S) or a full (p, p) matrix.
    """
    Sigma = np.asarray(Sigma, dtype=np.float64)
    S = np.asarray(S, dtype=np.float64)
    if S.ndim == 1:
        S = np.diag(S)
    cross = Sigma - S
    return np.block([[Sigma, cross], [cross, Sigma]])


# ---------------------------------------------------------------------------
# model assembly and sampling


def _lower_factor(C: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L' = C for any PSD C (rank-deficient ok)."""
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        pass
    w, V = scipy.linalg.eigh((C + C.T) / 2.0)
    w = np.clip(w, 0.0, None)
    B = V * np.sqrt(w)
    # C = B B'; an LQ decomposition of B gives the triangular factor without
    # any jitter, which keeps the zero matrix factoring to exactly zero
    R = scipy.linalg.qr(B.T, mode="economic")[1]
    L = R.T
    # fix column signs so the diagonal is nonnegative (cosmetic)
    signs = np.sign(np.diag(L))
    signs[signs == 0] = 1.0
    return L * signs


def _conditional_maps(Sigma: np.ndarray, S: np.ndarray):
    """S Sigma^{-1} and the lower factor of 2S - S Sigma^{-1} S."""
    if not np.any(S):
        # zero decorrelation: the knockoff copy is X itself, no inverse needed
        zero = np.zeros_like(Sigma)
        return zero, zero
    try:
        SigInvS = scipy.linalg.solve(Sigma, S, assume_a="pos")
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise NotPsd(
            "covariance is singular; refit moments with shrinkage"
        ) from exc
    A = SigInvS.T  # = S Sigma^{-1} by symmetry of S and Sigma
    C = 2.0 * S - S @ SigInvS
    C = (C + C.T) / 2.0
    return A, _lower_factor(C)


def _model_from_moments(moments: MomentEstimate, S, method: str, **extra) -> KnockoffModel:
    S = np.asarray(S, dtype=np.float64)
    if S.ndim == 1:
        s_diag = S.copy()
        S = np.diag(S)
    else:
        s_diag = np.diag(S).copy()
    A, L = _conditional_maps(moments.covariance, S)
    return KnockoffModel(
        moments=moments,
        s=s_diag,
        method=method,
        conditional_mean_map=A,
        conditional_cov_factor=L,
        **extra,
    )


def fit_knockoff_model(X, method: str = "asdp", shrinkage: Optional[str] = "ridge",
                       block_size: int = 10) -> KnockoffModel:
    """Estimate moments from X and solve for s in one step.

    ``method`` is ``"equi"`` or ``"asdp"``; see :func:`fit_group_knockoff_model`
    for group knockoffs.
    """
    moments = estimate_moments(X, shrinkage=shrinkage)
    if method == "equi":
        s = solve_s_equi(moments.covariance)
        return _model_from_moments(moments, s, "equi")
    if method == "asdp":
        s = solve_s_asdp(moments.covariance, block_size=block_size)
        return _model_from_moments(moments, s, "asdp", block_size=block_size)
    raise ValueError(f"unknown knockoff method {method!r}")


def fit_group_knockoff_model(X, groups: GroupSpec,
                             shrinkage: Optional[str] = "ridge") -> KnockoffModel:
    """Group-equicorrelated knockoff model with S = gamma * blockdiag(Sigma_gg)."""
    moments = estimate_moments(X, shrinkage=shrinkage)
    S, gamma = solve_s_group(moments.covariance, groups)
    return _model_from_moments(moments, S, "group_equi", groups=groups, gamma=gamma)


def sample_knockoffs(X, model: KnockoffModel, seed) -> np.ndarray:
    """Draw the knockoff copy Xk conditional on X; pure given (X, model, seed).

    The update is applied as X + (Z L' - Xz A') * scale with Xz the
    standardized data, so a zero-s model returns X bit-identically.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected 2-d data, got ndim={X.ndim}")
    p = model.s.shape[0]
    if X.shape[1] != p:
        raise DimensionMismatch(
            f"model has p={p} columns, data has {X.shape[1]}"
        )
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("data matrix contains non-finite entries")
    scale = model.moments.correlation_scale
    Xz = (X - model.moments.mean) / scale
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal(X.shape)
    delta = Z @ model.conditional_cov_factor.T - Xz @ model.conditional_mean_map.T
    return X + delta * scale


def sample_group_knockoffs(X, groups: GroupSpec, seed,
                           shrinkage: Optional[str] = "ridge") -> np.ndarray:
    """Group knockoffs in one call: estimate moments, solve gamma, sample."""
    model = fit_group_knockoff_model(X, groups, shrinkage=shrinkage)
    return sample_knockoffs(X, model, seed)
