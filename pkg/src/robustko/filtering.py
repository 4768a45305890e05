"""Antisymmetric feature statistics and the knockoff selection threshold.

The statistics compare each variable against its knockoff copy: LCD takes
the coefficient-magnitude difference |b_j| - |b_{j+p}| at a single penalty,
LSM the signed maximum of the two path entry penalties, and the group
variant applies LSM to group entry penalties.  The data-dependent threshold

    T = min{ t > 0 : (#{w_j <= -t} + plus) / max(1, #{w_j >= t}) <= alpha }

is scanned over the distinct positive |w_j|; when no candidate qualifies the
selection is empty with the estimated FDP reported as 0.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, EmptyStats
from .knockoffs import GroupSpec
from .regression import FitResult, LassoPath

__all__ = [
    "FeatureStats",
    "SelectionResult",
    "lcd_statistics",
    "lsm_statistics",
    "group_lsm_statistics",
    "knockoff_threshold",
    "fdp_hat",
]


@dataclass
class FeatureStats:
    """Per-variable knockoff statistics w (length p)."""

    w: np.ndarray
    kind: str  # "lcd" | "lsm" | "group_lsm"
    lambda0: Optional[float] = None
    group_map: Optional[GroupSpec] = None


@dataclass
class SelectionResult:
    """Outcome of thresholding: selected = {j : w_j >= threshold} (0-based)."""

    threshold: float
    selected: np.ndarray
    fdp_estimate: float
    nominal_fdr: float
    plus_variant: bool


def _stat_vector(stats) -> np.ndarray:
    w = stats.w if isinstance(stats, FeatureStats) else stats
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    if w.size == 0:
        raise EmptyStats("no statistics to threshold")
    if not np.all(np.isfinite(w)):
        raise ValueError("statistics contain non-finite values")
    return w


def lcd_statistics(path_fit: FitResult, p: int) -> FeatureStats:
    """Lasso coefficient difference w_j = |b_j| - |b_{j+p}| from a joint fit.

    ``path_fit`` must be a fit on the 2p-column [X, Xk] design (typically
    cross-validated, with the chosen penalty recorded in lambda_selected).
    Swapping a column with its knockoff swaps the two magnitudes, so the
    statistic flips sign by construction.
    """
    b = np.asarray(path_fit.coefficients, dtype=np.float64)
    if b.shape[0] != 2 * p:
        raise DimensionMismatch(f"expected 2p={2*p} coefficients, got {b.shape[0]}")
    w = np.abs(b[:p]) - np.abs(b[p:])
    return FeatureStats(w=w, kind="lcd", lambda0=path_fit.lambda_selected)


def lsm_statistics(path: LassoPath, p: int) -> FeatureStats:
    """Lasso signed max w_j = sign(lam_j - lam_{j+p}) * max(lam_j, lam_{j+p}).

    Entry penalties come from ``path.entry_lambda`` over the joint design;
    exact ties yield w_j = 0 (sign(0) = 0 convention).
    """
    lam = np.asarray(path.entry_lambda, dtype=np.float64)
    if lam.shape[0] != 2 * p:
        raise DimensionMismatch(f"expected 2p={2*p} entry penalties, got {lam.shape[0]}")
    ours, theirs = lam[:p], lam[p:]
    w = np.sign(ours - theirs) * np.maximum(ours, theirs)
    return FeatureStats(w=w, kind="lsm")


def group_lsm_statistics(path: LassoPath, groups: GroupSpec) -> FeatureStats:
    """Group LSM from a group-lasso path over the 2G twin groups.

    ``path`` must come from :func:`~robustko.regression.group_lasso_path` on
    [X, Xk] with the knockoff block assigned twin ids G+1..2G.  One statistic
    per original group, broadcast to that group's member columns.
    """
    lam = np.asarray(path.entry_lambda, dtype=np.float64)
    p = groups.assignments.shape[0]
    if lam.shape[0] != 2 * p:
        raise DimensionMismatch(f"expected entry penalties for 2p={2*p} columns")
    w = np.empty(p)
    for g in range(1, groups.group_count + 1):
        idx = groups.members(g)
        lam_orig = lam[idx[0]]
        lam_twin = lam[p + idx[0]]
        w[idx] = np.sign(lam_orig - lam_twin) * max(lam_orig, lam_twin)
    return FeatureStats(w=w, kind="group_lsm", group_map=groups)


def knockoff_threshold(stats, alpha: float, plus_variant: bool = False) -> SelectionResult:
    """Scan candidate thresholds ascending and select {j : w_j >= T}.

    ``plus_variant`` adds 1 to the numerator (the variant with the
    finite-sample FDR guarantee); the default matches the plain ratio.
    When no candidate satisfies the bound, T = +inf and the empty selection
    carries fdp_estimate 0.
    """
    w = _stat_vector(stats)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    candidates = np.unique(np.abs(w[w != 0.0]))
    w_sorted = np.sort(w)
    n = w.size
    # counts for every candidate at once: #{w <= -t} and #{w >= t}
    neg = np.searchsorted(w_sorted, -candidates, side="right")
    pos = n - np.searchsorted(w_sorted, candidates, side="left")
    ratio = (neg + (1.0 if plus_variant else 0.0)) / np.maximum(1, pos)
    ok = np.flatnonzero(ratio <= alpha)
    if ok.size == 0:
        return SelectionResult(
            threshold=float("inf"),
            selected=np.empty(0, dtype=np.int64),
            fdp_estimate=0.0,
            nominal_fdr=float(alpha),
            plus_variant=bool(plus_variant),
        )
    t = float(candidates[ok[0]])
    selected = np.flatnonzero(w >= t)
    fdp = float(np.count_nonzero(w <= -t)) / max(1, selected.size)
    return SelectionResult(
        threshold=t,
        selected=selected,
        fdp_estimate=fdp if selected.size else 0.0,
        nominal_fdr=float(alpha),
        plus_variant=bool(plus_variant),
    )


def fdp_hat(stats, t: float) -> float:
    """Raw estimated FDP at threshold t: #{w <= -t} / max(1, #{w >= t}).

    Unlike :func:`knockoff_threshold`, no empty-selection convention is
    applied here; the caller sees the raw ratio.
    """
    w = _stat_vector(stats)
    if not t > 0:
        raise ValueError(f"threshold must be positive, got {t}")
    return float(np.count_nonzero(w <= -t)) / max(1, int(np.count_nonzero(w >= t)))
