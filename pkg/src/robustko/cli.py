"""Command-line front end: selection pipelines, simulation, and evaluation.

Every subcommand reads CSV data plus an optional JSON config file, with any
config key overridable by a command-line flag, and writes deterministic
JSON/CSV reports (no timestamps; identical config and seed give
byte-identical files).  Stochastic subcommands require an explicit seed.
Exit codes: 0 success, 2 validation error, 3 computation error.
"""

import argparse
import json
import sys

import numpy as np

from . import diagnostics as diag
from .errors import (
    BlockSolveDiverged,
    ConfigError,
    Diverged,
    LeverageOne,
    RobustKoError,
    SingularDesign,
)
from .evaluation import (
    DailyRolling,
    ExpandingAnnual,
    Fixed,
    ForecastPipeline,
    make_windows,
    model_confidence_set,
    run_forecast_experiment,
)
from .grouppca import fit_group_pca, transform
from .io import (
    DataMatrix,
    load_dataset,
    load_group_map,
    write_csv_table,
    write_json_report,
)
from .knockoffs import fit_group_knockoff_model, fit_knockoff_model, sample_knockoffs
from .robust import (
    KnockoffConfig,
    exp_weights,
    linear_weights,
    repeated_subsampling,
    single_knockoff_pass,
    uniform_weights,
    weighted_fdr_selection,
)
from .simulate import SimDesign, measure_fdr_power, simulate_design

SCHEMA_VERSION = "1"

_COMPUTATION_ERRORS = (Diverged, BlockSolveDiverged, SingularDesign, LeverageOne)


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ConfigError("config file must contain a JSON object")
    return cfg


def _merged(args, defaults: dict) -> dict:
    """Flag value if given, else config-file value, else the default."""
    cfg = _load_config(getattr(args, "config", None))
    unknown = set(cfg) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = {}
    for key, default in defaults.items():
        v = getattr(args, key, None)
        if v is None:
            v = cfg.get(key, default)
        out[key] = v
    return out


def _require_seed(opt) -> int:
    if opt.get("seed") is None:
        raise ConfigError("--seed is required for stochastic subcommands")
    return int(opt["seed"])


def _parse_grid(text):
    if text is None:
        return None
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def _weight_scheme(kind, K):
    if kind == "uniform":
        return uniform_weights(K)
    if kind == "linear":
        return linear_weights(K)
    if kind == "exp":
        return exp_weights(K)
    raise ConfigError(f"unknown weight scheme '{kind}'")


def _load_matrix(opt) -> DataMatrix:
    data = load_dataset(opt["data"], response=opt.get("response"))
    if opt.get("response") is not None and data.y is None:
        raise ConfigError("response column produced no values")
    return data


def _knockoff_config(opt, groups=None) -> KnockoffConfig:
    return KnockoffConfig(
        construction=opt.get("construction", "equi"),
        statistic=opt.get("statistic", "lcd"),
        plus_variant=bool(opt.get("plus", False)),
        shrinkage=opt.get("shrinkage", "ridge"),
        block_size=int(opt.get("block_size", 10)),
        groups=groups,
        cv_folds=int(opt.get("folds", 10)),
    )


def _ranked(names, scores):
    order = np.lexsort((np.arange(len(names)), -np.asarray(scores, dtype=np.float64)))
    return [names[i] for i in order]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    opt = _merged(
        args,
        dict(
            n=300, p=50, covariance="ar1", rho=0.3, block_size=10, active_count=10,
            amplitude=3.5, noise_sd=1.0, seed=None, output="sim",
        ),
    )
    seed = _require_seed(opt)
    design = SimDesign(
        n=int(opt["n"]), p=int(opt["p"]), covariance=opt["covariance"],
        rho=float(opt["rho"]), block_size=int(opt["block_size"]),
        active_count=int(opt["active_count"]), amplitude=float(opt["amplitude"]),
        noise_sd=float(opt["noise_sd"]), seed=seed,
    )
    X, y, active = simulate_design(design)
    names = [f"x{j + 1}" for j in range(design.p)]
    prefix = opt["output"]
    write_csv_table(
        f"{prefix}_data.csv",
        names + ["y"],
        (list(X[i]) + [y[i]] for i in range(design.n)),
    )
    write_json_report(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "simulate",
            "seed": seed,
            "design": {
                "n": design.n, "p": design.p, "covariance": design.covariance,
                "rho": design.rho, "block_size": design.block_size,
                "active_count": design.active_count, "amplitude": design.amplitude,
                "noise_sd": design.noise_sd,
            },
            "variables": names,
            "active_indices": active,
            "active_variables": [names[j] for j in active],
        },
        f"{prefix}_truth.json",
    )
    print(f"wrote {prefix}_data.csv and {prefix}_truth.json")
    return 0


def _cmd_knockoff(args) -> int:
    opt = _merged(
        args,
        dict(
            data=None, response=None, construction="asdp", shrinkage="ridge",
            block_size=10, groups=None, seed=None, output="knockoff",
            diagnostics=False,
        ),
    )
    if opt["data"] is None:
        raise ConfigError("--data is required")
    seed = _require_seed(opt)
    data = _load_matrix(opt)
    if opt["groups"] is not None:
        spec = load_group_map(opt["groups"], data.column_names)
        model = fit_group_knockoff_model(data.X, spec, shrinkage=opt["shrinkage"])
    elif opt["construction"] in ("equi", "asdp"):
        model = fit_knockoff_model(
            data.X, method=opt["construction"], shrinkage=opt["shrinkage"],
            block_size=int(opt["block_size"]),
        )
    else:
        raise ConfigError(f"unknown construction '{opt['construction']}'")
    Xk = sample_knockoffs(data.X, model, seed=seed)
    prefix = opt["output"]
    write_csv_table(
        f"{prefix}_knockoffs.csv",
        [f"{c}_ko" for c in data.column_names],
        (list(row) for row in Xk),
    )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "knockoff",
        "seed": seed,
        "construction": opt["construction"] if opt["groups"] is None else "group",
        "shrinkage": opt["shrinkage"],
        "shrinkage_intensity": model.moments.shrinkage_intensity,
        "variables": data.column_names,
        "s": model.s,
    }
    if model.gamma is not None:
        report["gamma"] = model.gamma
    if opt["diagnostics"]:
        n_even = data.X.shape[0] - (data.X.shape[0] % 2)
        cfg = diag.DiagnosticsConfig(swap_seed=seed)
        report["diagnostics"] = {
            "j_mmd": diag.j_mmd(data.X, Xk, cfg),
            "j_second_order": diag.j_second_order(data.X, Xk),
            "j_decorrelation": diag.j_decorrelation(data.X, Xk, s_star=model.s),
            "rows_used": n_even,
            "swap_seed": seed,
        }
    write_json_report(report, f"{prefix}_model.json")
    print(f"wrote {prefix}_knockoffs.csv and {prefix}_model.json")
    return 0


def _cmd_select(args) -> int:
    opt = _merged(
        args,
        dict(
            data=None, response=None, alpha=0.2, statistic="lcd",
            construction="asdp", plus=False, shrinkage="ridge", block_size=10,
            folds=10, groups=None, seed=None, output="select.json",
        ),
    )
    if opt["data"] is None or opt["response"] is None:
        raise ConfigError("--data and --response are required")
    seed = _require_seed(opt)
    data = _load_matrix(opt)
    spec = (
        load_group_map(opt["groups"], data.column_names)
        if opt["groups"] is not None
        else None
    )
    config = _knockoff_config(opt, groups=spec)
    stats, sel = single_knockoff_pass(
        data.X, data.y, float(opt["alpha"]), config, seed=seed
    )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "select",
        "seed": seed,
        "alpha": float(opt["alpha"]),
        "statistic": opt["statistic"],
        "construction": config.construction,
        "plus_variant": config.plus_variant,
        "variables": data.column_names,
        "w": stats.w,
        "threshold": sel.threshold if np.isfinite(sel.threshold) else "inf",
        "selected": [data.column_names[j] for j in sel.selected],
        "fdp_estimate": sel.fdp_estimate,
    }
    if stats.lambda0 is not None:
        report["lambda0"] = stats.lambda0
    write_json_report(report, opt["output"])
    print(f"wrote {opt['output']}")
    return 0


def _cmd_robust_select(args) -> int:
    opt = _merged(
        args,
        dict(
            data=None, response=None, alpha=0.2, statistic="lcd",
            construction="asdp", plus=False, shrinkage="ridge", block_size=10,
            folds=10, groups=None, theta=0.9, B=100, threads=1, seed=None,
            output="robust_select.json", csv=None,
        ),
    )
    if opt["data"] is None or opt["response"] is None:
        raise ConfigError("--data and --response are required")
    seed = _require_seed(opt)
    data = _load_matrix(opt)
    spec = (
        load_group_map(opt["groups"], data.column_names)
        if opt["groups"] is not None
        else None
    )
    config = _knockoff_config(opt, groups=spec)
    probs = repeated_subsampling(
        data.X, data.y, float(opt["alpha"]), knockoff_config=config,
        theta=float(opt["theta"]), B=int(opt["B"]), seed=seed,
        n_threads=int(opt["threads"]),
    )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "robust-select",
        "seed": seed,
        "alpha": probs.alpha,
        "theta": probs.theta,
        "B": probs.B,
        "statistic": config.statistic,
        "construction": config.construction,
        "variables": data.column_names,
        "probabilities": probs.probs,
        "ranked_variables": _ranked(data.column_names, probs.probs),
    }
    write_json_report(report, opt["output"])
    if opt["csv"]:
        write_csv_table(
            opt["csv"],
            ["variable", "probability"],
            zip(data.column_names, probs.probs),
        )
    print(f"wrote {opt['output']}")
    return 0


def _cmd_wfdr(args) -> int:
    opt = _merged(
        args,
        dict(
            data=None, response=None, grid=None, weights="exp", mode="probability",
            statistic="lcd", construction="asdp", plus=False, shrinkage="ridge",
            block_size=10, folds=10, groups=None, theta=0.9, B=100, threads=1,
            share_subsamples=False, seed=None, output="wfdr.json", csv=None,
        ),
    )
    if opt["data"] is None or opt["response"] is None:
        raise ConfigError("--data and --response are required")
    seed = _require_seed(opt)
    data = _load_matrix(opt)
    spec = (
        load_group_map(opt["groups"], data.column_names)
        if opt["groups"] is not None
        else None
    )
    config = _knockoff_config(opt, groups=spec)
    grid = _parse_grid(opt["grid"])
    if grid is None:
        grid = list(0.05 * np.arange(1, 20))
    scheme = _weight_scheme(opt["weights"], len(grid))
    scores = weighted_fdr_selection(
        data.X, data.y, fdr_grid=grid, knockoff_config=config, scheme=scheme,
        mode=opt["mode"], theta=float(opt["theta"]), B=int(opt["B"]), seed=seed,
        n_threads=int(opt["threads"]), share_subsamples=bool(opt["share_subsamples"]),
    )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "wfdr",
        "seed": seed,
        "mode": scores.mode,
        "theta": float(opt["theta"]),
        "B": int(opt["B"]),
        "statistic": config.statistic,
        "construction": config.construction,
        "fdr_grid": scores.fdr_grid,
        "weight_scheme": scheme.kind,
        "weights": scheme.weights,
        "variables": data.column_names,
        "scores": scores.scores,
        "per_level": scores.per_level,
        "ranked_variables": _ranked(data.column_names, scores.scores),
    }
    write_json_report(report, opt["output"])
    if opt["csv"]:
        write_csv_table(
            opt["csv"], ["variable", "score"], zip(data.column_names, scores.scores)
        )
    print(f"wrote {opt['output']}")
    return 0


def _cmd_group_pca(args) -> int:
    opt = _merged(
        args,
        dict(
            data=None, response=None, groups=None, cap=4, var_threshold=0.9,
            output="grouppca",
        ),
    )
    if opt["data"] is None or opt["groups"] is None:
        raise ConfigError("--data and --groups are required")
    data = _load_matrix(opt)
    spec = load_group_map(opt["groups"], data.column_names)
    model = fit_group_pca(
        data.X, spec, cap=int(opt["cap"]), var_threshold=float(opt["var_threshold"])
    )
    comps = transform(model, data.X)
    prefix = opt["output"]
    header = list(model.component_names)
    rows = (list(row) for row in comps)
    if data.y is not None:
        header = header + ["y"]
        rows = (list(comps[i]) + [data.y[i]] for i in range(comps.shape[0]))
    write_csv_table(f"{prefix}_components.csv", header, rows)
    write_json_report(
        {
            "schema_version": SCHEMA_VERSION,
            "command": "group-pca",
            "cap": int(opt["cap"]),
            "var_threshold": float(opt["var_threshold"]),
            "groups": spec.names,
            "retained": model.retained,
            "component_names": model.component_names,
            "explained_variance_ratio": [r for r in model.explained_variance_ratio],
            "component_groups": [
                g for g in range(1, spec.group_count + 1) for _ in range(model.retained[g - 1])
            ],
        },
        f"{prefix}_model.json",
    )
    print(f"wrote {prefix}_components.csv and {prefix}_model.json")
    return 0


def _scheme_from_options(opt):
    kind = opt["scheme"]
    if kind == "fixed":
        if opt["train_end"] is None or opt["test_span"] is None:
            raise ConfigError("fixed windows need train_end and test_span")
        return Fixed(train_end=int(opt["train_end"]), test_span=int(opt["test_span"]))
    if kind == "expanding":
        if not opt["origins"]:
            raise ConfigError("expanding windows need origins")
        origins = tuple(
            int(tok) for tok in str(opt["origins"]).split(",") if tok.strip()
        )
        return ExpandingAnnual(origins=origins, horizon_years=int(opt["horizon"]))
    if kind == "rolling":
        if opt["train_years"] is None:
            raise ConfigError("rolling windows need train_years")
        return DailyRolling(
            train_years=float(opt["train_years"]), test_start=opt["test_start"]
        )
    raise ConfigError(f"unknown window scheme '{kind}'")


def _pipelines_from_config(raw, seed: int):
    if not raw:
        return [ForecastPipeline(name="none+ols", seed=seed)]
    pipes = []
    for entry in raw:
        if not isinstance(entry, dict):
            raise ConfigError("each pipeline must be a JSON object")
        entry = dict(entry)
        ko = entry.pop("knockoff", None)
        entry.setdefault("seed", seed)
        try:
            if ko is not None:
                entry["knockoff"] = KnockoffConfig(**ko)
            pipes.append(ForecastPipeline(**entry))
        except TypeError as exc:
            raise ConfigError(f"bad pipeline entry: {exc}") from None
    return pipes


def _cmd_evaluate(args) -> int:
    opt = _merged(
        args,
        dict(
            data=None, response=None, date_column=None, scheme="fixed",
            train_end=None, test_span=None, origins=None, horizon=1,
            train_years=None, test_start=None, pipelines=None, mcs=False,
            mcs_alpha=0.15, mcs_B=5000, seed=None, output="evaluate",
        ),
    )
    if opt["data"] is None or opt["response"] is None or opt["date_column"] is None:
        raise ConfigError("--data, --response and --date-column are required")
    seed = _require_seed(opt)
    dataset = load_dataset(
        opt["data"], response=opt["response"], date_column=opt["date_column"]
    )
    plan = make_windows(dataset, _scheme_from_options(opt))
    pipes = _pipelines_from_config(opt["pipelines"], seed)
    report = run_forecast_experiment(dataset, plan, pipes)
    prefix = opt["output"]
    out = {
        "schema_version": SCHEMA_VERSION,
        "command": "evaluate",
        "seed": seed,
        "scheme": report.scheme,
        "n_splits": len(plan.splits),
        "performance": [
            {
                "method": perf.name,
                "rmse": perf.rmse,
                "mae": perf.mae,
                "n_predictions": perf.n_predictions,
            }
            for perf in report.performances
        ],
        "leakage_audit_passed": all(
            e["max_train_row"] < e["min_test_row"] for e in report.audit_trail
        ),
    }
    if opt["mcs"]:
        mcs = model_confidence_set(
            report.losses, alpha=float(opt["mcs_alpha"]), B=int(opt["mcs_B"]),
            seed=seed,
        )
        out["mcs"] = {
            "alpha": mcs.alpha,
            "B": mcs.B,
            "block_length": mcs.block_length,
            "pairwise_block_lengths": mcs.pairwise_block_lengths,
            "surviving": mcs.surviving,
            "methods": [
                {"method": name, "tmax": mcs.tmax_per_method[i], "p_value": mcs.p_values[i]}
                for i, name in enumerate(mcs.method_names)
            ],
            "elimination_order": mcs.elimination_order,
        }
    write_json_report(out, f"{prefix}_report.json")
    write_csv_table(
        f"{prefix}_forecast.csv",
        ["scheme", "method", "rmse", "mae", "n_predictions"],
        (
            [report.scheme, perf.name, perf.rmse, perf.mae, perf.n_predictions]
            for perf in report.performances
        ),
    )
    print(f"wrote {prefix}_report.json and {prefix}_forecast.csv")
    return 0


def _cmd_report(args) -> int:
    opt = _merged(
        args,
        dict(scores=None, truth=None, top=None, output="report.json"),
    )
    if opt["scores"] is None:
        raise ConfigError("--scores is required")
    with open(opt["scores"]) as fh:
        scores_doc = json.load(fh)
    for key in ("variables", "schema_version"):
        if key not in scores_doc:
            raise ConfigError(f"scores file lacks '{key}'")
    names = list(scores_doc["variables"])
    values = scores_doc.get("scores", scores_doc.get("probabilities"))
    if values is None:
        raise ConfigError("scores file lacks 'scores' or 'probabilities'")
    values = np.asarray(values, dtype=np.float64)
    ranked = _ranked(names, values)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "report",
        "source_command": scores_doc.get("command"),
        "seed": scores_doc.get("seed"),
        "variables": names,
        "scores": values,
        "ranked_variables": ranked,
    }
    if "selected" in scores_doc:
        report["selected"] = scores_doc["selected"]
    if opt["truth"] is not None:
        with open(opt["truth"]) as fh:
            truth_doc = json.load(fh)
        truth_names = truth_doc.get("active_variables")
        if truth_names is None:
            raise ConfigError("truth file lacks 'active_variables'")
        index_of = {name: j for j, name in enumerate(names)}
        missing = [t for t in truth_names if t not in index_of]
        if missing:
            raise ConfigError(f"truth variable '{missing[0]}' not in scores file")
        truth_idx = [index_of[t] for t in truth_names]
        top = int(opt["top"]) if opt["top"] is not None else len(truth_idx)
        top_names = ranked[:top]
        block = {
            "active_variables": list(truth_names),
            "top_k": top,
            "top_variables": top_names,
            "top_contains_all_active": set(truth_names) <= set(top_names),
        }
        if "selected" in report:
            sel_idx = [index_of[s] for s in report["selected"] if s in index_of]
            fdp, power = measure_fdr_power(sel_idx, truth_idx)
            block["fdp"] = fdp
            block["power"] = power
        report["truth"] = block
    write_json_report(report, opt["output"])
    print(f"wrote {opt['output']}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common_data_flags(sp, response_required=True):
    sp.add_argument("--data", help="input CSV with a header row")
    if response_required:
        sp.add_argument("--response", help="name of the response column")
    sp.add_argument("--config", help="JSON config file; flags override its keys")
    sp.add_argument("--seed", type=int, help="random seed (required)")


def _add_knockoff_flags(sp):
    sp.add_argument("--construction", choices=["equi", "asdp"], help="s-vector solver")
    sp.add_argument("--statistic", choices=["lcd", "lsm", "group_lsm"])
    sp.add_argument("--plus", action="store_true", default=None,
                    help="use the +1 numerator variant of the threshold")
    sp.add_argument("--shrinkage", choices=["ridge", "ledoit", "none"])
    sp.add_argument("--block-size", dest="block_size", type=int)
    sp.add_argument("--folds", type=int, help="cross-validation folds")
    sp.add_argument("--groups", help="variable,group_id CSV for group constructions")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustko",
        description="Robust knockoff variable selection with FDR control",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("simulate", help="draw a synthetic design with known truth")
    sp.add_argument("--config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--covariance", choices=["identity", "equicorr", "ar1", "blockdiag"])
    sp.add_argument("--rho", type=float)
    sp.add_argument("--block-size", dest="block_size", type=int)
    sp.add_argument("--active-count", dest="active_count", type=int)
    sp.add_argument("--amplitude", type=float)
    sp.add_argument("--noise-sd", dest="noise_sd", type=float)
    sp.add_argument("--output", help="prefix for _data.csv and _truth.json")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("knockoff", help="construct knockoffs and diagnostics")
    _add_common_data_flags(sp)
    sp.add_argument("--construction", choices=["equi", "asdp"])
    sp.add_argument("--shrinkage", choices=["ridge", "ledoit", "none"])
    sp.add_argument("--block-size", dest="block_size", type=int)
    sp.add_argument("--groups")
    sp.add_argument("--diagnostics", action="store_true", default=None)
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_knockoff)

    sp = sub.add_parser("select", help="single-level knockoff selection")
    _add_common_data_flags(sp)
    _add_knockoff_flags(sp)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_select)

    sp = sub.add_parser("robust-select", help="subsampled selection probabilities")
    _add_common_data_flags(sp)
    _add_knockoff_flags(sp)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--B", type=int)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--csv")
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_robust_select)

    sp = sub.add_parser("wfdr", help="weighted scores over an FDR grid")
    _add_common_data_flags(sp)
    _add_knockoff_flags(sp)
    sp.add_argument("--grid", help="comma-separated FDR levels")
    sp.add_argument("--weights", choices=["uniform", "linear", "exp"])
    sp.add_argument("--mode", choices=["probability", "rank"])
    sp.add_argument("--theta", type=float)
    sp.add_argument("--B", type=int)
    sp.add_argument("--threads", type=int)
    sp.add_argument("--share-subsamples", dest="share_subsamples",
                    action="store_true", default=None)
    sp.add_argument("--csv")
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_wfdr)

    sp = sub.add_parser("group-pca", help="per-group principal components")
    sp.add_argument("--data")
    sp.add_argument("--response")
    sp.add_argument("--config")
    sp.add_argument("--groups")
    sp.add_argument("--cap", type=int)
    sp.add_argument("--var-threshold", dest="var_threshold", type=float)
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_group_pca)

    sp = sub.add_parser("evaluate", help="window forecasts, losses, and the MCS")
    _add_common_data_flags(sp)
    sp.add_argument("--date-column", dest="date_column")
    sp.add_argument("--scheme", choices=["fixed", "expanding", "rolling"])
    sp.add_argument("--train-end", dest="train_end", type=int)
    sp.add_argument("--test-span", dest="test_span", type=int)
    sp.add_argument("--origins", help="comma-separated origin years")
    sp.add_argument("--horizon", type=int)
    sp.add_argument("--train-years", dest="train_years", type=float)
    sp.add_argument("--test-start", dest="test_start")
    sp.add_argument("--mcs", action="store_true", default=None)
    sp.add_argument("--mcs-alpha", dest="mcs_alpha", type=float)
    sp.add_argument("--mcs-B", dest="mcs_B", type=int)
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_evaluate)

    sp = sub.add_parser("report", help="final report from scores and known truth")
    sp.add_argument("--config")
    sp.add_argument("--scores", help="JSON output of wfdr or robust-select")
    sp.add_argument("--truth", help="JSON truth file from simulate")
    sp.add_argument("--top", type=int)
    sp.add_argument("--output")
    sp.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _COMPUTATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (RobustKoError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
