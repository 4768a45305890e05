"""Per-group principal components for dimension reduction before selection.

Each variable group is standardized on the fit window and reduced to the
leading principal components of its own correlation matrix.  The number of
retained components is the smaller of a hard cap and the count needed to
explain a target share of within-group variance.  The fitted model maps any
compatible matrix onto the component space, so out-of-sample rows can be
scored with the training-window centering, scaling, and loadings.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import (
    DimensionMismatch,
    NonFiniteInput,
    SchemaMismatch,
    TooFewRows,
    ZeroVarianceColumn,
)
from .knockoffs import GroupSpec

__all__ = ["GroupPcaModel", "fit_group_pca", "transform"]


@dataclass
class GroupPcaModel:
    """Per-group standardization and loadings fitted on one window."""

    groups: GroupSpec
    centers: List[np.ndarray]
    scales: List[np.ndarray]
    loadings: List[np.ndarray]  # (p_g, m_g), orthonormal columns
    explained_variance_ratio: List[np.ndarray]
    eigenvalues: List[np.ndarray]
    retained: np.ndarray
    component_names: List[str]
    n_columns: int
    fit_window: Optional[Tuple] = None


def _signed(vectors: np.ndarray) -> np.ndarray:
    """Fix each column's sign so its largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        if out[k, j] < 0:
            out[:, j] = -out[:, j]
    return out


def fit_group_pca(
    X: np.ndarray,
    groups: GroupSpec,
    cap: int = 4,
    var_threshold: float = 0.9,
    fit_window: Optional[Tuple] = None,
) -> GroupPcaModel:
    """Fit per-group PCA on standardized columns.

    Retains min(cap, m*) components per group, where m* is the smallest
    count whose cumulative explained variance ratio reaches
    ``var_threshold``; always at least one.  Component names follow
    ``PC<group>.<index>`` with 1-based indices.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch("X must be a 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("X contains non-finite values")
    n, p = X.shape
    if groups.assignments.shape[0] != p:
        raise DimensionMismatch(
            f"group map covers {groups.assignments.shape[0]} columns, X has {p}"
        )
    if n < 2:
        raise TooFewRows("need at least two rows to standardize")
    if cap < 1:
        raise ValueError(f"cap must be at least 1, got {cap}")
    if not 0.0 < var_threshold <= 1.0:
        raise ValueError(f"var_threshold must lie in (0, 1], got {var_threshold}")

    centers, scales, loadings, ratios, eigvals, names = [], [], [], [], [], []
    retained = np.empty(groups.group_count, dtype=np.int64)
    for g in range(1, groups.group_count + 1):
        idx = groups.members(g)
        Xg = X[:, idx]
        center = Xg.mean(axis=0)
        scale = Xg.std(axis=0, ddof=1)
        bad = np.flatnonzero(scale == 0.0)
        if bad.size:
            raise ZeroVarianceColumn(int(idx[bad[0]]))
        Z = (Xg - center) / scale
        R = (Z.T @ Z) / (n - 1)
        np.fill_diagonal(R, 1.0)
        w, V = np.linalg.eigh(R)
        order = np.argsort(w)[::-1]
        w = np.clip(w[order], 0.0, None)
        V = _signed(V[:, order])
        ratio = w / idx.size  # trace of a correlation matrix is its dimension
        m_star = int(np.searchsorted(np.cumsum(ratio), var_threshold - 1e-12) + 1)
        m = max(1, min(cap, m_star, idx.size))
        centers.append(center)
        scales.append(scale)
        loadings.append(V[:, :m])
        ratios.append(ratio[:m])
        eigvals.append(w[:m])
        retained[g - 1] = m
        names.extend(f"PC{g}.{i}" for i in range(1, m + 1))
    return GroupPcaModel(
        groups=groups,
        centers=centers,
        scales=scales,
        loadings=loadings,
        explained_variance_ratio=ratios,
        eigenvalues=eigvals,
        retained=retained,
        component_names=names,
        n_columns=p,
        fit_window=fit_window,
    )


def transform(model: GroupPcaModel, X_new: np.ndarray) -> np.ndarray:
    """Project rows onto the fitted components, groups concatenated in order.

    Standardization uses the centers and scales from the fit window, so the
    same model scores training and out-of-sample rows identically.
    """
    X_new = np.asarray(X_new, dtype=np.float64)
    if X_new.ndim != 2:
        raise DimensionMismatch("X_new must be a 2-D matrix")
    if X_new.shape[1] != model.n_columns:
        raise SchemaMismatch(
            f"model was fit on {model.n_columns} columns, got {X_new.shape[1]}"
        )
    pieces = []
    for g in range(1, model.groups.group_count + 1):
        idx = model.groups.members(g)
        Z = (X_new[:, idx] - model.centers[g - 1]) / model.scales[g - 1]
        pieces.append(Z @ model.loadings[g - 1])
    return np.hstack(pieces)
