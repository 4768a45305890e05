"""Post-selection forecasting harness and model-confidence-set testing.

Window schemes mirror common backtest designs over event-time data: a fixed
train/test split by year, expanding training sets evaluated on the following
years, and a daily-rolling calendar window where all events on one date are
predicted by a model trained on the strictly preceding window.  Pooled
per-observation losses feed a model confidence set: an iterative elimination
procedure on the max t-statistic with a recentered moving-block bootstrap.

Every fit inside the harness is audited — the rows a model saw are recorded
per split so leakage of test-period information is checkable after the fact.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTestWindow,
    EmptyTrainWindow,
    NonFiniteInput,
    SeriesTooShort,
)
from .grouppca import GroupPcaModel, fit_group_pca, transform
from .knockoffs import GroupSpec
from .regression import cv_select_lambda, elastic_net_fit
from .robust import (
    KnockoffConfig,
    WeightScheme,
    repeated_subsampling,
    single_knockoff_pass,
    weighted_fdr_selection,
)

__all__ = [
    "TimeIndexedDataset",
    "Fixed",
    "ExpandingAnnual",
    "DailyRolling",
    "WindowPlan",
    "LossMatrix",
    "McsResult",
    "ForecastPipeline",
    "MethodPerformance",
    "ForecastReport",
    "make_windows",
    "rmse",
    "mae",
    "run_forecast_experiment",
    "audit_no_leakage",
    "block_length_aic",
    "block_bootstrap",
    "model_confidence_set",
]

_SEED_MOD = 2**63


# ---------------------------------------------------------------------------
# datasets and window plans
# ---------------------------------------------------------------------------


@dataclass
class TimeIndexedDataset:
    """Event rows ordered in time; several events may share one date."""

    timestamps: np.ndarray
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        ts = np.asarray(self.timestamps)
        if ts.dtype.kind in ("U", "S", "O"):
            ts = ts.astype("datetime64[D]")
        elif ts.dtype.kind == "M":
            ts = ts.astype("datetime64[D]")
        else:
            ts = ts.astype(np.float64)
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        if X.ndim != 2:
            raise DimensionMismatch("X must be a 2-D matrix")
        if not (ts.shape[0] == X.shape[0] == y.shape[0]):
            raise DimensionMismatch("timestamps, X and y must agree on row count")
        if ts.shape[0] == 0:
            raise DimensionMismatch("dataset has no rows")
        if np.any(ts[:-1] > ts[1:]):
            raise ValueError("timestamps must be non-decreasing")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise NonFiniteInput("dataset contains non-finite values")
        self.timestamps, self.X, self.y = ts, X, y

    @property
    def n(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class Fixed:
    """One split: train on years <= train_end, test on the next test_span years."""

    train_end: int
    test_span: int


@dataclass(frozen=True)
class ExpandingAnnual:
    """Per origin year tau: train on years <= tau, test on the following
    horizon_years pooled.  Test windows of nearby origins may overlap."""

    origins: Tuple[int, ...]
    horizon_years: int = 1


@dataclass(frozen=True)
class DailyRolling:
    """Per event date d: train on the calendar window [d - train_years, d),
    predict every event on d.  Dates without any preceding history are
    skipped unless test_start pins the evaluation range."""

    train_years: float
    test_start: Optional[object] = None


@dataclass
class WindowPlan:
    scheme: object
    scheme_name: str
    splits: List[Tuple[np.ndarray, np.ndarray]]


def _years(ts: np.ndarray) -> np.ndarray:
    if ts.dtype.kind == "M":
        return ts.astype("datetime64[Y]").astype(np.int64) + 1970
    return np.floor(ts).astype(np.int64)


def _shift_back(d, years: float):
    """The calendar instant `years` before date d (month arithmetic, day
    clamped to the target month's length); plain subtraction on numeric time."""
    if not isinstance(d, np.datetime64):
        return d - years
    if float(years).is_integer():
        m = d.astype("datetime64[M]")
        day = int((d - m.astype("datetime64[D]")).astype(np.int64))
        start_m = m - np.timedelta64(int(years) * 12, "M")
        month_len = int(
            ((start_m + np.timedelta64(1, "M")).astype("datetime64[D]")
             - start_m.astype("datetime64[D]")).astype(np.int64)
        )
        return start_m.astype("datetime64[D]") + np.timedelta64(
            min(day, month_len - 1), "D"
        )
    return d - np.timedelta64(int(round(years * 365.25)), "D")


def _check_split(ts, train_idx, test_idx):
    if train_idx.size == 0:
        raise EmptyTrainWindow("window scheme produced an empty training set")
    if test_idx.size == 0:
        raise EmptyTestWindow("window scheme produced an empty test set")
    if not ts[train_idx].max() < ts[test_idx].min():
        raise ValueError("test rows must lie strictly after the training range")


def make_windows(dataset: TimeIndexedDataset, scheme) -> WindowPlan:
    """Materialize a window scheme into explicit (train rows, test rows) splits."""
    ts = dataset.timestamps
    years = _years(ts)
    splits: List[Tuple[np.ndarray, np.ndarray]] = []
    if isinstance(scheme, Fixed):
        train = np.flatnonzero(years <= scheme.train_end)
        test = np.flatnonzero(
            (years > scheme.train_end) & (years <= scheme.train_end + scheme.test_span)
        )
        _check_split(ts, train, test)
        splits.append((train, test))
        name = "fixed"
    elif isinstance(scheme, ExpandingAnnual):
        for tau in sorted(scheme.origins):
            train = np.flatnonzero(years <= tau)
            test = np.flatnonzero((years > tau) & (years <= tau + scheme.horizon_years))
            _check_split(ts, train, test)
            splits.append((train, test))
        if not splits:
            raise EmptyTestWindow("no origins requested")
        name = "expanding_annual"
    elif isinstance(scheme, DailyRolling):
        dates = np.unique(ts)
        start_at = scheme.test_start
        if start_at is not None and ts.dtype.kind == "M":
            start_at = np.datetime64(start_at, "D")
        for d in dates:
            if start_at is not None and d < start_at:
                continue
            lo = _shift_back(d, scheme.train_years)
            train = np.flatnonzero((ts >= lo) & (ts < d))
            if train.size == 0:
                if start_at is not None:
                    raise EmptyTrainWindow(f"no training rows before {d}")
                continue  # warm-up period
            test = np.flatnonzero(ts == d)
            _check_split(ts, train, test)
            splits.append((train, test))
        if not splits:
            raise EmptyTestWindow("no test date has any preceding training rows")
        name = "daily_rolling"
    else:
        raise TypeError(f"unknown window scheme {type(scheme).__name__}")
    return WindowPlan(scheme=scheme, scheme_name=name, splits=splits)


# ---------------------------------------------------------------------------
# error metrics
# ---------------------------------------------------------------------------


def _paired(pred, actual):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    actual = np.asarray(actual, dtype=np.float64).reshape(-1)
    if pred.shape[0] != actual.shape[0]:
        raise DimensionMismatch("prediction and actual lengths differ")
    if pred.shape[0] == 0:
        raise ValueError("need at least one observation")
    return pred, actual


def rmse(pred, actual) -> float:
    """Root mean squared prediction error."""
    pred, actual = _paired(pred, actual)
    return float(np.sqrt(np.mean((pred - actual) ** 2)))


def mae(pred, actual) -> float:
    """Mean absolute prediction error."""
    pred, actual = _paired(pred, actual)
    return float(np.mean(np.abs(pred - actual)))


# ---------------------------------------------------------------------------
# forecasting harness
# ---------------------------------------------------------------------------


@dataclass
class ForecastPipeline:
    """A named selection + post-selection estimation recipe for the harness.

    ``selection`` is one of None (keep every column), "single" (one knockoff
    pass at ``alpha``), "robust" (subsampled selection probabilities
    thresholded at ``prob_cut``), or "wfdr" (weighted grid scores, keeping
    either the ``top_m`` best or every score >= ``score_cut``).
    """

    name: str = "none+ols"
    selection: Optional[str] = None
    post_estimator: str = "ols"  # "ols" | "lasso" | "elastic_net"
    knockoff: KnockoffConfig = field(default_factory=KnockoffConfig)
    alpha: float = 0.2
    fdr_grid: Optional[np.ndarray] = None
    weight_scheme: Optional[WeightScheme] = None
    mode: str = "probability"
    theta: float = 0.9
    B: int = 50
    prob_cut: float = 0.5
    score_cut: float = 0.5
    top_m: Optional[int] = None
    mixing: float = 0.5
    cv_folds: int = 10
    pca_groups: Optional[GroupSpec] = None
    pca_cap: int = 4
    pca_var_threshold: float = 0.9
    seed: int = 0
    n_threads: int = 1

    def __post_init__(self):
        if self.selection not in (None, "single", "robust", "wfdr"):
            raise ValueError(f"unknown selection method '{self.selection}'")
        if self.post_estimator not in ("ols", "lasso", "elastic_net"):
            raise ValueError(f"unknown post estimator '{self.post_estimator}'")


@dataclass
class MethodPerformance:
    name: str
    rmse: float
    mae: float
    n_predictions: int


@dataclass
class LossMatrix:
    """Per-observation squared losses, one column per forecasting method."""

    losses: np.ndarray
    method_names: List[str]

    def __post_init__(self):
        L = np.asarray(self.losses, dtype=np.float64)
        if L.ndim != 2:
            raise DimensionMismatch("losses must be T x m")
        if L.shape[1] != len(self.method_names):
            raise DimensionMismatch("one method name per loss column required")
        if not np.all(np.isfinite(L)) or np.any(L < 0):
            raise ValueError("losses must be finite and non-negative")
        self.losses = L


@dataclass
class ForecastReport:
    scheme: str
    performances: List[MethodPerformance]
    losses: LossMatrix
    predictions: np.ndarray  # T x m
    actuals: np.ndarray
    test_rows: np.ndarray
    split_of: np.ndarray
    audit_trail: List[dict]


def _select_columns(Xtr, ytr, pipe: ForecastPipeline, seed_int: int) -> np.ndarray:
    if pipe.selection is None:
        return np.arange(Xtr.shape[1])
    if pipe.selection == "single":
        _, sel = single_knockoff_pass(
            Xtr, ytr, pipe.alpha, pipe.knockoff, seed=seed_int
        )
        return sel.selected
    if pipe.selection == "robust":
        probs = repeated_subsampling(
            Xtr,
            ytr,
            pipe.alpha,
            knockoff_config=pipe.knockoff,
            theta=pipe.theta,
            B=pipe.B,
            seed=seed_int,
            n_threads=pipe.n_threads,
        )
        return np.flatnonzero(probs.probs >= pipe.prob_cut)
    scores = weighted_fdr_selection(
        Xtr,
        ytr,
        fdr_grid=pipe.fdr_grid,
        knockoff_config=pipe.knockoff,
        scheme=pipe.weight_scheme,
        mode=pipe.mode,
        theta=pipe.theta,
        B=pipe.B,
        seed=seed_int,
        n_threads=pipe.n_threads,
    )
    if pipe.top_m is not None:
        order = np.argsort(-scores.scores, kind="stable")
        return np.sort(order[: pipe.top_m])
    return np.flatnonzero(scores.scores >= pipe.score_cut)


def _fit_predict(Xtr, ytr, Xte, pipe: ForecastPipeline, cols, cv_seed: int):
    n_tr = Xtr.shape[0]
    if cols.size == 0 or (pipe.post_estimator != "ols" and n_tr < 4):
        return np.full(Xte.shape[0], float(ytr.mean()))
    A, Ate = Xtr[:, cols], Xte[:, cols]
    if pipe.post_estimator == "ols":
        D = np.column_stack([np.ones(n_tr), A])
        beta, *_ = np.linalg.lstsq(D, ytr, rcond=None)
        return np.column_stack([np.ones(Ate.shape[0]), Ate]) @ beta
    folds = max(2, min(pipe.cv_folds, n_tr))
    if pipe.post_estimator == "lasso":
        fit = cv_select_lambda(A, ytr, folds=folds, seed=cv_seed)
    else:
        fit = elastic_net_fit(A, ytr, mixing=pipe.mixing, folds=folds, seed=cv_seed)
    return fit.intercept + Ate @ fit.coefficients


def run_forecast_experiment(
    dataset: TimeIndexedDataset,
    plan: WindowPlan,
    pipelines: Union[ForecastPipeline, Sequence[ForecastPipeline]],
) -> ForecastReport:
    """Fit every pipeline on each split's training rows and score its test rows.

    Group-PCA preprocessing, variable selection, and the post estimator are
    all refit per split on training rows only; the audit trail records the
    rows each stage saw so the no-leakage property can be asserted afterwards.
    Losses are pooled over splits into a matrix aligned across methods.
    """
    if isinstance(pipelines, ForecastPipeline):
        pipelines = [pipelines]
    names = [p.name for p in pipelines]
    if len(set(names)) != len(names):
        raise ValueError("pipeline names must be distinct")
    test_rows = np.concatenate([test for _, test in plan.splits])
    split_of = np.concatenate(
        [np.full(test.size, i) for i, (_, test) in enumerate(plan.splits)]
    )
    actuals = dataset.y[test_rows]
    preds = np.empty((test_rows.size, len(pipelines)))
    audit: List[dict] = []
    for m, pipe in enumerate(pipelines):
        offset = 0
        for i, (train, test) in enumerate(plan.splits):
            ss = np.random.SeedSequence([int(pipe.seed) % _SEED_MOD, i])
            sel_key, cv_key = (int(c.generate_state(1)[0]) for c in ss.spawn(2))
            Xtr, ytr = dataset.X[train], dataset.y[train]
            Xte = dataset.X[test]
            stages = []
            if pipe.pca_groups is not None:
                pca = fit_group_pca(
                    Xtr,
                    pipe.pca_groups,
                    cap=pipe.pca_cap,
                    var_threshold=pipe.pca_var_threshold,
                )
                Xtr, Xte = transform(pca, Xtr), transform(pca, Xte)
                stages.append("pca")
            cols = _select_columns(Xtr, ytr, pipe, sel_key)
            if pipe.selection is not None:
                stages.append("selection")
            preds[offset : offset + test.size, m] = _fit_predict(
                Xtr, ytr, Xte, pipe, cols, cv_key
            )
            stages.append("estimator")
            audit.append(
                {
                    "pipeline": pipe.name,
                    "split": i,
                    "stages": stages,
                    "train_rows": train.copy(),
                    "test_rows": test.copy(),
                    "max_train_row": int(train.max()),
                    "min_test_row": int(test.min()),
                    "selected_columns": cols.copy(),
                }
            )
            offset += test.size
    sq = (preds - actuals[:, None]) ** 2
    perf = [
        MethodPerformance(
            name=names[m],
            rmse=float(np.sqrt(sq[:, m].mean())),
            mae=float(np.abs(preds[:, m] - actuals).mean()),
            n_predictions=int(test_rows.size),
        )
        for m in range(len(pipelines))
    ]
    return ForecastReport(
        scheme=plan.scheme_name,
        performances=perf,
        losses=LossMatrix(losses=sq, method_names=names),
        predictions=preds,
        actuals=actuals,
        test_rows=test_rows,
        split_of=split_of,
        audit_trail=audit,
    )


def audit_no_leakage(report: ForecastReport) -> bool:
    """True iff every recorded fit used only rows before its split's test rows."""
    return all(e["max_train_row"] < e["min_test_row"] for e in report.audit_trail)


# ---------------------------------------------------------------------------
# block bootstrap and the model confidence set
# ---------------------------------------------------------------------------


def block_length_aic(series, q_max: Optional[int] = None) -> int:
    """AR order chosen by AIC over a common estimation sample, floored at 1.

    Autoregressions of order 0..q_max are fit by least squares on the rows
    where all candidate lags exist, so the information criteria are
    comparable; a perfectly predictable (e.g. constant) series degenerates
    to order 0 and returns 1.
    """
    x = np.asarray(series, dtype=np.float64).reshape(-1)
    T = x.shape[0]
    if T < 10:
        raise SeriesTooShort(f"need at least 10 observations, got {T}")
    if q_max is None:
        q_max = min(10, T // 5)
    q_max = max(0, min(q_max, T - 2))
    n_eff = T - q_max
    target = x[q_max:]
    best_q, best_aic = 0, math.inf
    for q in range(q_max + 1):
        cols = [np.ones(n_eff)]
        cols.extend(x[q_max - lag : T - lag] for lag in range(1, q + 1))
        D = np.column_stack(cols)
        beta, *_ = np.linalg.lstsq(D, target, rcond=None)
        rss = float(np.sum((target - D @ beta) ** 2))
        aic = n_eff * math.log(max(rss, 1e-300) / n_eff) + 2.0 * (q + 1)
        if aic < best_aic - 1e-12:
            best_q, best_aic = q, aic
    return max(1, best_q)


def block_bootstrap(series, k: int, B: int, seed: int = 0) -> np.ndarray:
    """Moving-block resamples: B rows of length T from uniform length-k blocks.

    ceil(T/k) blocks are drawn with replacement, concatenated, and truncated
    to T.  k = T reproduces the original series in every resample; k = 1 is
    i.i.d. resampling.
    """
    x = np.asarray(series, dtype=np.float64).reshape(-1)
    T = x.shape[0]
    if k < 1 or B < 1:
        raise ValueError("block length and resample count must be positive")
    k = min(k, T)
    n_blocks = -(-T // k)
    rng = np.random.default_rng(seed)
    starts = rng.integers(0, T - k + 1, size=(B, n_blocks))
    idx = (starts[:, :, None] + np.arange(k)).reshape(B, n_blocks * k)[:, :T]
    return x[idx]


@dataclass
class McsResult:
    """Surviving method set with per-method max-t statistics and p-values."""

    surviving: List[str]
    tmax_per_method: np.ndarray
    p_values: np.ndarray
    alpha: float
    B: int
    block_length: int
    pairwise_block_lengths: np.ndarray
    elimination_order: List[str]
    method_names: List[str]


def _bootstrap_index_matrix(T: int, k: int, B: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    k = min(k, T)
    n_blocks = -(-T // k)
    starts = rng.integers(0, T - k + 1, size=(B, n_blocks))
    return (starts[:, :, None] + np.arange(k)).reshape(B, n_blocks * k)[:, :T]


def model_confidence_set(
    losses: LossMatrix,
    alpha: float = 0.15,
    B: int = 5000,
    seed: int = 0,
) -> McsResult:
    """Iterative max-t elimination over a recentered moving-block bootstrap.

    At each step the loss differential of every remaining method against the
    rest, d_i.t, yields t_i = mean(d_i.) / bootstrap-se; the max statistic is
    compared against its recentered bootstrap null and the worst method
    (largest t, ties by name) is eliminated while the test rejects.  The
    block length is the median AR order over all pairwise loss differentials,
    computed once up front.  Methods with identical losses produce zero
    differentials and survive with p-value 1.
    """
    L = losses.losses
    names = list(losses.method_names)
    T, m = L.shape
    if m < 2:
        raise ValueError("model confidence set needs at least two methods")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")

    pair_ks = []
    for i in range(m):
        for j in range(i + 1, m):
            d = L[:, i] - L[:, j]
            pair_ks.append(block_length_aic(d) if T >= 10 else 1)
    pair_ks = np.asarray(pair_ks, dtype=np.int64)
    k = max(1, int(round(float(np.median(pair_ks)))))

    p_values = np.full(m, np.nan)
    t_record = np.full(m, np.nan)
    elimination: List[str] = []
    active = list(range(m))
    running_p = 0.0
    step = 0
    while True:
        idx = _bootstrap_index_matrix(T, k, B, seed=int(
            np.random.SeedSequence([seed % _SEED_MOD, step]).generate_state(1)[0]
        ))
        sub = L[:, active]
        mm = len(active)
        # d_i.t: method i's loss minus the mean loss of the other remaining methods
        row_mean = sub.mean(axis=1, keepdims=True)
        D = (sub - row_mean) * (mm / (mm - 1.0))
        dbar = D.mean(axis=0)
        boot_means = D[idx].mean(axis=1)  # (B, mm)
        var_hat = np.mean((boot_means - dbar) ** 2, axis=0)
        se = np.sqrt(var_hat)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(se > 0, dbar / se, np.where(dbar == 0.0, 0.0, np.inf * np.sign(dbar)))
            t_boot = np.where(se > 0, (boot_means - dbar) / se, 0.0)
        t_max = float(t.max())
        null_max = t_boot.max(axis=1)
        p = float(np.mean(null_max >= t_max))
        running_p = max(running_p, p)
        if p < alpha and mm > 1:
            order = np.flatnonzero(t == t.max())
            worst_local = min(order, key=lambda i_loc: names[active[i_loc]])
            worst = active[worst_local]
            p_values[worst] = running_p
            t_record[worst] = t[worst_local]
            elimination.append(names[worst])
            active.pop(worst_local)
            step += 1
            if len(active) == 1:
                last = active[0]
                p_values[last] = 1.0
                t_record[last] = 0.0
                break
            continue
        for i_loc, i_glob in enumerate(active):
            p_values[i_glob] = running_p
            t_record[i_glob] = t[i_loc]
        break

    surviving = [names[i] for i in range(m) if p_values[i] >= alpha]
    return McsResult(
        surviving=surviving,
        tmax_per_method=t_record,
        p_values=np.clip(p_values, 0.0, 1.0),
        alpha=float(alpha),
        B=int(B),
        block_length=k,
        pairwise_block_lengths=pair_ks,
        elimination_order=elimination,
        method_names=names,
    )
