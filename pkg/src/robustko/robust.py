"""Robustified selection: repeated subsampling and weighted FDR aggregation.

A single knockoff pass is noisy — the sampled knockoff copy and the
cross-validated penalty both perturb the selected set.  Robustification runs
the full pass on B row subsamples (fraction theta, drawn without
replacement) and reports per-variable selection probabilities.  The weighted
variant repeats this over a grid of nominal FDR levels and averages the
per-level evidence with decaying weights, so variables that survive at
stringent levels score highest.

Every repetition derives its random streams from a stable hash of
(master seed, grid index, repetition index); the result is therefore
identical regardless of how many worker threads execute the repetitions.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DimensionMismatch, SubsampleTooSmall, UnmappedComponent
from .filtering import (
    FeatureStats,
    SelectionResult,
    group_lsm_statistics,
    knockoff_threshold,
    lcd_statistics,
    lsm_statistics,
)
from .knockoffs import (
    GroupSpec,
    fit_group_knockoff_model,
    fit_knockoff_model,
    sample_knockoffs,
)
from .regression import GridSpec, cv_select_lambda, group_lasso_path, lasso_path

__all__ = [
    "KnockoffConfig",
    "SelectionProbabilities",
    "WeightScheme",
    "WeightedScores",
    "single_knockoff_pass",
    "repeated_subsampling",
    "probs_to_ranks",
    "uniform_weights",
    "linear_weights",
    "exp_weights",
    "weighted_fdr_selection",
    "aggregate_group_scores",
]

_SEED_MOD = 2**63


@dataclass
class KnockoffConfig:
    """Choices for one knockoff pass: construction, statistic, fitting knobs."""

    construction: str = "equi"  # "equi" | "asdp" | "group"
    statistic: str = "lcd"  # "lcd" | "lsm" | "group_lsm"
    plus_variant: bool = False
    shrinkage: Optional[str] = "ridge"
    block_size: int = 10
    groups: Optional[GroupSpec] = None
    cv_folds: int = 10
    grid: Optional[GridSpec] = None

    def __post_init__(self):
        if self.construction not in ("equi", "asdp", "group"):
            raise ConfigError(f"unknown construction '{self.construction}'")
        if self.statistic not in ("lcd", "lsm", "group_lsm"):
            raise ConfigError(f"unknown statistic '{self.statistic}'")
        if self.construction == "group" and self.groups is None:
            raise ConfigError("group construction requires a GroupSpec")
        if self.statistic == "group_lsm" and self.groups is None:
            raise ConfigError("group_lsm statistic requires a GroupSpec")


@dataclass
class SelectionProbabilities:
    """Per-variable selection frequencies over B subsample repetitions."""

    probs: np.ndarray
    alpha: float
    B: int
    theta: float
    per_rep_selected: np.ndarray  # (B, p) boolean indicators
    per_rep_rows: Optional[np.ndarray] = None  # (B, n_sub) row indices


@dataclass
class WeightScheme:
    """Normalized, non-increasing weights over the FDR grid (smallest first)."""

    kind: str  # "uniform" | "linear" | "exp"
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if w.size == 0:
            raise ConfigError("weight scheme needs at least one level")
        if np.any(w < 0):
            raise ConfigError("weights must be non-negative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ConfigError("weights must sum to one")
        if np.any(np.diff(w) > 1e-15):
            raise ConfigError("weights must be non-increasing across the grid")
        self.weights = w


@dataclass
class WeightedScores:
    """Weighted per-variable evidence across the nominal-FDR grid."""

    scores: np.ndarray
    mode: str  # "probability" | "rank"
    fdr_grid: np.ndarray
    scheme: WeightScheme
    per_level: np.ndarray = field(default=None)  # (K, p) probs or ranks


def _rep_seed_sequence(seed: int, stream_key: int, rep: int) -> np.random.SeedSequence:
    """Stable per-repetition entropy; independent of execution order."""
    return np.random.SeedSequence([int(seed) % _SEED_MOD, int(stream_key), int(rep)])


def _pass_statistics(
    X: np.ndarray,
    y: np.ndarray,
    config: KnockoffConfig,
    knockoff_seed,
    cv_seed,
) -> FeatureStats:
    """Construct knockoffs, fit the joint model, return the w statistics."""
    p = X.shape[1]
    if config.construction == "group":
        model = fit_group_knockoff_model(X, config.groups, shrinkage=config.shrinkage)
    else:
        model = fit_knockoff_model(
            X,
            method=config.construction,
            shrinkage=config.shrinkage,
            block_size=config.block_size,
        )
    Xk = sample_knockoffs(X, model, seed=knockoff_seed)
    joint = np.hstack([X, Xk])
    if config.statistic == "lcd":
        fit = cv_select_lambda(
            joint, y, folds=config.cv_folds, seed=cv_seed, grid=config.grid
        )
        return lcd_statistics(fit, p)
    if config.statistic == "lsm":
        path = lasso_path(joint, y, grid=config.grid)
        return lsm_statistics(path, p)
    g = config.groups
    joint_assign = np.concatenate([g.assignments, g.assignments + g.group_count])
    joint_groups = GroupSpec(assignments=joint_assign, group_count=2 * g.group_count)
    path = group_lasso_path(joint, y, joint_groups, grid=config.grid)
    return group_lsm_statistics(path, g)


def single_knockoff_pass(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float,
    config: Optional[KnockoffConfig] = None,
    seed: int = 0,
):
    """One full pass on the given data; returns (FeatureStats, SelectionResult)."""
    config = config or KnockoffConfig()
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed) % _SEED_MOD)
    ko_ss, cv_ss = ss.spawn(2)
    stats = _pass_statistics(X, y, config, ko_ss, cv_ss)
    sel = knockoff_threshold(stats, alpha, plus_variant=config.plus_variant)
    return stats, sel


def _check_subsample(n: int, p: int, theta: float, B: int) -> int:
    if not 0.0 < theta <= 1.0:
        raise ConfigError(f"theta must lie in (0, 1], got {theta}")
    if B < 1:
        raise ConfigError(f"B must be a positive integer, got {B}")
    n_sub = int(np.floor(theta * n))
    if n_sub < 10:
        raise SubsampleTooSmall(
            f"subsample of {n_sub} rows (theta={theta}, n={n}) is too small"
        )
    if n_sub < 2 * p:
        warnings.warn(
            f"subsample of {n_sub} rows is below 2p={2*p}; "
            "selection probabilities may be unstable",
            stacklevel=3,
        )
    return n_sub


def _one_repetition(X, y, alpha_levels, config, seed, stream_key, rep, n_sub):
    """Fit one subsample and threshold its statistics at every alpha level."""
    n = X.shape[0]
    ss = _rep_seed_sequence(seed, stream_key, rep)
    rows_ss, ko_ss, cv_ss = ss.spawn(3)
    rows = np.sort(np.random.default_rng(rows_ss).choice(n, size=n_sub, replace=False))
    stats = _pass_statistics(X[rows], y[rows], config, ko_ss, cv_ss)
    p = stats.w.shape[0]
    indicators = np.zeros((len(alpha_levels), p), dtype=bool)
    for i, a in enumerate(alpha_levels):
        sel = knockoff_threshold(stats, a, plus_variant=config.plus_variant)
        indicators[i, sel.selected] = True
    return rows, indicators


def _run_repetitions(X, y, alpha_levels, config, theta, B, seed, stream_key, n_threads):
    n, p_cols = X.shape
    n_sub = _check_subsample(n, p_cols, theta, B)
    args = [
        (X, y, alpha_levels, config, seed, stream_key, b, n_sub) for b in range(B)
    ]
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(lambda a: _one_repetition(*a), args))
    else:
        results = [_one_repetition(*a) for a in args]
    rows = np.stack([r[0] for r in results])
    indicators = np.stack([r[1] for r in results])  # (B, K, p)
    return rows, indicators


def repeated_subsampling(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float,
    knockoff_config: Optional[KnockoffConfig] = None,
    theta: float = 0.9,
    B: int = 100,
    seed: int = 0,
    n_threads: int = 1,
    stream_key: int = 0,
) -> SelectionProbabilities:
    """Selection probabilities from B knockoff passes on row subsamples.

    Each repetition draws floor(theta*n) rows without replacement, runs the
    complete pass (moment estimation, knockoff sampling, model fit,
    thresholding at ``alpha``) and records the 0/1 selection indicator.
    Probabilities are the indicator means, exact multiples of 1/B.

    Repetitions are embarrassingly parallel; ``n_threads`` controls only the
    wall-clock, never the result.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch("X and y disagree on the number of rows")
    config = knockoff_config or KnockoffConfig()
    rows, indicators = _run_repetitions(
        X, y, [float(alpha)], config, theta, B, seed, stream_key, n_threads
    )
    per_rep = indicators[:, 0, :]
    probs = per_rep.sum(axis=0) / float(B)
    return SelectionProbabilities(
        probs=probs,
        alpha=float(alpha),
        B=int(B),
        theta=float(theta),
        per_rep_selected=per_rep,
        per_rep_rows=rows,
    )


def probs_to_ranks(probs: np.ndarray) -> np.ndarray:
    """Ranks 1..p, p for the most frequently selected; ties go to the higher index."""
    probs = np.asarray(probs, dtype=np.float64).reshape(-1)
    p = probs.shape[0]
    order = np.lexsort((np.arange(p), probs))  # ascending prob, then ascending index
    ranks = np.empty(p, dtype=np.int64)
    ranks[order] = np.arange(1, p + 1)
    return ranks


def uniform_weights(K: int) -> WeightScheme:
    """Flat scheme: averaging across the grid."""
    if K < 1:
        raise ConfigError("need at least one grid level")
    return WeightScheme(kind="uniform", weights=np.full(K, 1.0 / K))


def linear_weights(K: int) -> WeightScheme:
    """Linearly decaying weights K, K-1, ..., 1 (normalized); level 1 is the
    smallest nominal FDR and gets the largest weight."""
    if K < 1:
        raise ConfigError("need at least one grid level")
    raw = np.arange(K, 0, -1, dtype=np.float64)
    return WeightScheme(kind="linear", weights=raw / raw.sum())


def exp_weights(K: int) -> WeightScheme:
    """Geometrically decaying weights K^((K-k)/(K-1)) for k = 1..K (normalized).

    The first level outweighs the last by a factor of K; K = 1 degenerates
    to the single weight 1.
    """
    if K < 1:
        raise ConfigError("need at least one grid level")
    if K == 1:
        return WeightScheme(kind="exp", weights=np.array([1.0]))
    k = np.arange(1, K + 1, dtype=np.float64)
    raw = float(K) ** ((K - k) / (K - 1.0))
    return WeightScheme(kind="exp", weights=raw / raw.sum())


def weighted_fdr_selection(
    X: np.ndarray,
    y: np.ndarray,
    fdr_grid: Optional[Sequence[float]] = None,
    knockoff_config: Optional[KnockoffConfig] = None,
    scheme: Optional[WeightScheme] = None,
    mode: str = "probability",
    theta: float = 0.9,
    B: int = 100,
    seed: int = 0,
    n_threads: int = 1,
    share_subsamples: bool = False,
) -> WeightedScores:
    """Weighted per-variable scores across a grid of nominal FDR levels.

    For each level alpha_k the subsampled selection probabilities (or their
    ranks, ``mode="rank"``) are computed, then combined as

        score_j = sum_k weight_k * evidence_{k,j}.

    The default grid is 0.05, 0.10, ..., 0.95 with exponentially decaying
    weights, so evidence at stringent levels dominates.  With
    ``share_subsamples=True`` every level reuses the same subsample draws
    and knockoff samples, which makes the per-level indicator sets nested
    (selection at a smaller alpha implies selection at a larger one);
    by default levels use independent draws.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch("X and y disagree on the number of rows")
    if fdr_grid is None:
        fdr_grid = 0.05 * np.arange(1, 20)
    grid = np.asarray(fdr_grid, dtype=np.float64).reshape(-1)
    if grid.size == 0:
        raise ConfigError("fdr_grid must be non-empty")
    if np.any(grid <= 0.0) or np.any(grid > 1.0):
        raise ConfigError("fdr_grid levels must lie in (0, 1]")
    if np.any(np.diff(grid) <= 0.0):
        raise ConfigError("fdr_grid must be strictly increasing")
    K = grid.size
    scheme = scheme or exp_weights(K)
    if scheme.weights.shape[0] != K:
        raise ConfigError(
            f"scheme has {scheme.weights.shape[0]} weights for a grid of {K} levels"
        )
    if mode not in ("probability", "rank"):
        raise ConfigError(f"unknown aggregation mode '{mode}'")
    config = knockoff_config or KnockoffConfig()

    p = X.shape[1]
    per_level = np.empty((K, p))
    if share_subsamples:
        _, indicators = _run_repetitions(
            X, y, list(grid), config, theta, B, seed, 0, n_threads
        )
        per_level[:] = indicators.sum(axis=0) / float(B)  # (K, p)
    else:
        for k in range(K):
            probs_k = repeated_subsampling(
                X,
                y,
                alpha=float(grid[k]),
                knockoff_config=config,
                theta=theta,
                B=B,
                seed=seed,
                n_threads=n_threads,
                stream_key=k,
            )
            per_level[k] = probs_k.probs
    if mode == "rank":
        per_level = np.stack([probs_to_ranks(row) for row in per_level]).astype(
            np.float64
        )
    scores = scheme.weights @ per_level
    return WeightedScores(
        scores=scores,
        mode=mode,
        fdr_grid=grid,
        scheme=scheme,
        per_level=per_level,
    )


def aggregate_group_scores(
    component_scores: WeightedScores,
    component_groups: GroupSpec,
    rescale_to=(1.0, 20.0),
) -> np.ndarray:
    """Group-level scores: the best score among a group's components.

    In rank mode the component ranks 1..p are first mapped affinely onto
    ``rescale_to`` (default 1..20) so scores are comparable across datasets
    with different component counts; probability mode aggregates as-is.
    Returns an array indexed by group id - 1.
    """
    scores = np.asarray(component_scores.scores, dtype=np.float64).reshape(-1)
    p = scores.shape[0]
    assigned = component_groups.assignments.shape[0]
    if assigned < p:
        raise UnmappedComponent(assigned)  # first component without a group
    if assigned > p:
        raise DimensionMismatch(
            f"group map covers {assigned} components but scores have {p}"
        )
    if component_scores.mode == "rank":
        lo, hi = float(rescale_to[0]), float(rescale_to[1])
        if p > 1:
            scores = lo + (scores - 1.0) * (hi - lo) / (p - 1.0)
        else:
            scores = np.array([hi])
    out = np.full(component_groups.group_count, -np.inf)
    for g in range(1, component_groups.group_count + 1):
        out[g - 1] = scores[component_groups.members(g)].max()
    return out
