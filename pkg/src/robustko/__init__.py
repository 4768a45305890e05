"""Robust knockoff variable selection with false-discovery-rate control.

The package builds second-order Gaussian knockoffs, computes antisymmetric
feature statistics from sparse regression fits, thresholds them at a nominal
FDR, and robustifies the selection by repeated subsampling and by weighted
aggregation across a grid of FDR levels.  Supporting modules provide
group-wise PCA preprocessing, a forecasting evaluation harness with model
confidence sets, knockoff-quality diagnostics, and a synthetic-data
simulation harness; the ``robustko`` command line exposes the pipeline.
"""

from . import errors
from .diagnostics import (
    DiagnosticsConfig,
    gaussian_mmd,
    j_decorrelation,
    j_mmd,
    j_second_order,
    swap,
    total_j,
)
from .evaluation import (
    DailyRolling,
    ExpandingAnnual,
    Fixed,
    ForecastPipeline,
    ForecastReport,
    LossMatrix,
    McsResult,
    TimeIndexedDataset,
    WindowPlan,
    audit_no_leakage,
    block_bootstrap,
    block_length_aic,
    mae,
    make_windows,
    model_confidence_set,
    rmse,
    run_forecast_experiment,
)
from .filtering import (
    FeatureStats,
    SelectionResult,
    fdp_hat,
    group_lsm_statistics,
    knockoff_threshold,
    lcd_statistics,
    lsm_statistics,
)
from .grouppca import GroupPcaModel, fit_group_pca, transform
from .io import DataMatrix, load_dataset, load_group_map, write_json_report
from .knockoffs import (
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
from .regression import (
    FitResult,
    GridSpec,
    LassoPath,
    cv_select_lambda,
    elastic_net_fit,
    group_lasso_path,
    lasso_path,
    ols_hc3,
)
from .robust import (
    KnockoffConfig,
    SelectionProbabilities,
    WeightScheme,
    WeightedScores,
    aggregate_group_scores,
    exp_weights,
    linear_weights,
    probs_to_ranks,
    repeated_subsampling,
    single_knockoff_pass,
    uniform_weights,
    weighted_fdr_selection,
)
from .simulate import SimDesign, design_covariance, measure_fdr_power, simulate_design

__version__ = "1.0.0"

__all__ = [
    "errors",
    "__version__",
    # knockoff construction
    "MomentEstimate",
    "KnockoffModel",
    "GroupSpec",
    "estimate_moments",
    "solve_s_equi",
    "solve_s_asdp",
    "solve_s_group",
    "joint_covariance",
    "fit_knockoff_model",
    "fit_group_knockoff_model",
    "sample_knockoffs",
    "sample_group_knockoffs",
    # sparse regression
    "GridSpec",
    "LassoPath",
    "FitResult",
    "lasso_path",
    "cv_select_lambda",
    "elastic_net_fit",
    "group_lasso_path",
    "ols_hc3",
    # filtering
    "FeatureStats",
    "SelectionResult",
    "lcd_statistics",
    "lsm_statistics",
    "group_lsm_statistics",
    "knockoff_threshold",
    "fdp_hat",
    # robust selection
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
    # group PCA
    "GroupPcaModel",
    "fit_group_pca",
    "transform",
    # evaluation
    "TimeIndexedDataset",
    "Fixed",
    "ExpandingAnnual",
    "DailyRolling",
    "WindowPlan",
    "LossMatrix",
    "McsResult",
    "ForecastPipeline",
    "ForecastReport",
    "make_windows",
    "rmse",
    "mae",
    "run_forecast_experiment",
    "audit_no_leakage",
    "block_length_aic",
    "block_bootstrap",
    "model_confidence_set",
    # diagnostics
    "DiagnosticsConfig",
    "swap",
    "gaussian_mmd",
    "j_mmd",
    "j_second_order",
    "j_decorrelation",
    "total_j",
    # simulation and IO
    "SimDesign",
    "design_covariance",
    "simulate_design",
    "measure_fdr_power",
    "DataMatrix",
    "load_dataset",
    "load_group_map",
    "write_json_report",
]
