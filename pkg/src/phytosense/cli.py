"""Command-line interface; stages compose through the documented file formats.

Exit codes: 0 success, 1 stage failure, 2 configuration/path error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, PhytosenseError


def _add_out(parser, required=True):
    parser.add_argument("--out", required=required, help="output directory")


def _add_seed(parser):
    parser.add_argument("--seed", type=int, required=True,
                        help="run seed (mandatory, no wall-clock seeding)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phytosense",
        description="Plant electrophysiology to environmental conditions pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic trace/env CSVs")
    _add_out(p)
    _add_seed(p)
    p.add_argument("--days", type=int, default=4)
    p.add_argument("--plants", type=int, default=2)
    p.add_argument("--native-rate", type=float, default=5.0,
                   help="trace sampling rate in Hz (200 reproduces the field device)")
    p.add_argument("--strength-day", type=float, default=1.0)
    p.add_argument("--strength-rain", type=float, default=1.0)
    p.add_argument("--strength-warm", type=float, default=1.0)
    p.add_argument("--strength-wind", type=float, default=1.0)
    p.add_argument("--null", action="store_true",
                   help="zero every signature strength (no-signal control)")

    p = sub.add_parser("ingest", help="validate trace/env CSVs")
    p.add_argument("--trace", nargs="*", default=[])
    p.add_argument("--env")
    _add_out(p)

    p = sub.add_parser("preprocess",
                       help="downsample, coverage-filter, and interpolate a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--day-offset-hours", type=int, default=0,
                   help="shift of the day boundary from UTC midnight")
    _add_out(p)

    p = sub.add_parser("label", help="cut labeled 1-h windows for one task")
    p.add_argument("--series", nargs="+", required=True,
                   help="preprocessed series CSVs")
    p.add_argument("--env", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--utc-offset-hours", type=int, default=0)
    p.add_argument("--mode", choices=["purity", "majority"], default="purity")
    _add_out(p)

    p = sub.add_parser("features", help="compute the feature matrix of a window file")
    p.add_argument("--windows", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--catalog", default="v1")
    _add_out(p)

    p = sub.add_parser("train", help="fit one pipeline on a whole feature matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--classifier", default="random_forest")
    p.add_argument("--no-smote", action="store_true")
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("evaluate", help="run the split protocol on a feature matrix")
    p.add_argument("--features", required=True)
    p.add_argument("--classifier", default="random_forest")
    p.add_argument("--task", default="")
    p.add_argument("--no-smote", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("select", help="MI ranking and top-k selection sweep")
    p.add_argument("--features", required=True)
    p.add_argument("--k", type=int, default=50)
    p.add_argument("--classifier", default="random_forest")
    p.add_argument("--no-smote", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("automl", help="two-phase greedy pipeline search")
    p.add_argument("--features", required=True)
    p.add_argument("--budget", type=int, default=1024)
    p.add_argument("--patience", type=int, default=100)
    p.add_argument("--task", default="")
    p.add_argument("--no-smote", action="store_true")
    _add_seed(p)
    _add_out(p)

    p = sub.add_parser("profile", help="time-of-day mean/std profile of series")
    p.add_argument("--series", nargs="+", required=True)
    p.add_argument("--no-figures", action="store_true")
    _add_out(p)

    p = sub.add_parser("run", help="full pipeline from a config JSON")
    p.add_argument("--config", required=True)

    p = sub.add_parser("adapt", help="convert an external dataset via a mapping JSON")
    p.add_argument("--mapping", required=True)
    _add_out(p)

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------

def _cmd_synth(args) -> None:
    from .synth import SynthSpec, generate_synthetic

    strengths = dict(day=args.strength_day, rain=args.strength_rain,
                     warm=args.strength_warm, wind=args.strength_wind)
    if args.null:
        strengths = dict.fromkeys(strengths, 0.0)
    spec = SynthSpec(days=args.days, plants=args.plants,
                     native_rate_hz=args.native_rate,
                     strength_day=strengths["day"], strength_rain=strengths["rain"],
                     strength_warm=strengths["warm"], strength_wind=strengths["wind"])
    manifest = generate_synthetic(spec, args.seed, args.out)
    print(json.dumps({"env": manifest["env_path"],
                      "traces": manifest["trace_paths"]}, indent=2))


def _cmd_ingest(args) -> None:
    from .ingest import parse_env_csv, parse_trace_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {"traces": [], "env": None}
    for path in args.trace:
        trace = parse_trace_csv(path)
        report["traces"].append({
            "path": str(path), "plant_id": trace.plant_id, "channel": trace.channel,
            "rows": len(trace), "duplicate_warnings": trace.duplicate_warnings,
            "start_ms": int(trace.timestamps_ms[0]),
            "end_ms": int(trace.timestamps_ms[-1]),
        })
    if args.env:
        env = parse_env_csv(args.env)
        report["env"] = {"path": str(args.env), "rows": len(env),
                         "start_ms": int(env.timestamps_ms[0]),
                         "end_ms": int(env.timestamps_ms[-1])}
    (out / "ingest_report.json").write_text(json.dumps(report, indent=2))
    print(f"validated {len(report['traces'])} trace file(s)"
          + (" and 1 env file" if report["env"] else ""))


def _cmd_preprocess(args) -> None:
    from .experiment import preprocess_trace
    from .ingest import parse_trace_csv
    from .preprocess import write_series_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace = parse_trace_csv(args.trace)
    cleaned, report = preprocess_trace(trace, args.day_offset_hours * 3_600_000)
    key = f"{trace.plant_id}_{trace.channel}"
    write_series_csv(cleaned, out / f"series_{key}.csv")
    (out / f"coverage_{key}.json").write_text(report.to_json())
    retained = len(report.retained_days())
    print(f"{key}: {retained}/{len(report.days)} day(s) retained")


def _cmd_label(args) -> None:
    from .experiment import label_series
    from .ingest import parse_env_csv
    from .labeling import STANDARD_RULES, write_skip_report, write_windows_csv
    from .preprocess import read_series_csv

    if args.task not in STANDARD_RULES:
        raise ConfigError(f"unknown task {args.task!r}; "
                          f"choose from {sorted(STANDARD_RULES)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series_list = [read_series_csv(p)[0] for p in args.series]
    env = parse_env_csv(args.env)
    windows, skips = label_series(series_list, env, args.task,
                                  args.utc_offset_hours, mode=args.mode)
    write_windows_csv(windows, out / f"windows_{args.task}.csv")
    write_skip_report(skips, out / f"skip_{args.task}.json")
    print(f"{args.task}: {len(windows)} window(s)")


def _cmd_features(args) -> None:
    from .experiment import matrix_for_task
    from .features import write_feature_csv
    from .labeling import read_windows_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    windows = read_windows_csv(args.windows, args.task)
    matrix = matrix_for_task(windows, args.catalog)
    write_feature_csv(matrix, out / f"features_{args.task}.csv")
    print(f"{matrix.n_rows} row(s) x {len(matrix.feature_names)} feature(s)")


def _cmd_train(args) -> None:
    from .experiment import resolve_classifier, train_on_matrix
    from .features import read_feature_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix = read_feature_csv(args.features)
    kind = resolve_classifier(args.classifier)
    pipeline = train_on_matrix(matrix, kind, seed=args.seed,
                               smote=not args.no_smote)
    model_path = out / f"model_{kind}.json"
    pipeline.save(model_path)
    print(f"saved {model_path}")


def _cmd_evaluate(args) -> None:
    from .evaluation import write_pr_csv
    from .experiment import evaluate_matrix, resolve_classifier
    from .features import read_feature_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix = read_feature_csv(args.features)
    kind = resolve_classifier(args.classifier)
    report = evaluate_matrix(matrix, kind, seed=args.seed,
                             smote=not args.no_smote, task=args.task)
    (out / f"eval_{kind}.json").write_text(report.to_json())
    write_pr_csv(report.pr_points, out / f"pr_{kind}.csv")
    if not args.no_figures:
        from .figures import plot_pr_curves
        plot_pr_curves({args.task or "task": (report.pr_points, report.pr_auc,
                                              report.baseline)},
                       out / f"pr_{kind}.png")
    print(f"test macro F1 {report.test_macro_f1_mean:.2f} "
          f"+/- {report.test_macro_f1_std:.2f} "
          f"(validation {report.val_macro_f1_mean:.2f} "
          f"+/- {report.val_macro_f1_std:.2f})")


def _cmd_select(args) -> None:
    from . import learn
    from .evaluation import SplitPlan
    from .experiment import resolve_classifier
    from .features import read_feature_csv
    from .resample import SmoteConfig
    from .select import mutual_information, sweep_top_k, write_mi_csv, write_sweep_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix = read_feature_csv(args.features)
    scores = mutual_information(matrix.features, matrix.labels,
                                feature_names=matrix.feature_names)
    write_mi_csv(scores, out / "mi_ranking.csv")
    kind = resolve_classifier(args.classifier)
    spec = learn.ClassifierSpec(kind, {}, args.seed)
    smote_cfg = None if args.no_smote else SmoteConfig(rng_seed=args.seed)
    sweep = sweep_top_k(matrix.features, matrix.labels, spec,
                        K=min(args.k, matrix.features.shape[1]),
                        plan=SplitPlan(seed=args.seed), smote_cfg=smote_cfg,
                        feature_names=matrix.feature_names)
    write_sweep_csv(sweep, out / "selection_sweep.csv")
    if not args.no_figures:
        from .figures import plot_selection_sweep
        plot_selection_sweep(sweep, out / "selection_sweep.png")
    best_k = sweep.ks[max(range(len(sweep.ks)),
                          key=lambda i: sweep.mean_macro_f1[i])]
    print(f"best k = {best_k}")


def _cmd_automl(args) -> None:
    from .experiment import automl_on_matrix
    from .features import read_feature_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix = read_feature_csv(args.features)
    pipeline, trace, report = automl_on_matrix(
        matrix, args.budget, args.patience, args.seed,
        smote=not args.no_smote, task=args.task)
    trace.write_jsonl(out / "automl_trace.jsonl")
    pipeline.save(out / "automl_pipeline.json")
    (out / "automl_report.json").write_text(json.dumps(report, indent=2))
    print(f"winner: {report['winner']['scaling']} + "
          f"{'+'.join(report['winner']['feature']) or 'none'} + "
          f"{report['winner']['classifier']} "
          f"(validation {report['winner']['val_macro_f1']:.2f}, "
          f"test {report['test_macro_f1']:.2f})")


def _cmd_profile(args) -> None:
    from .evaluation import write_profile_csv
    from .experiment import daily_profiles
    from .preprocess import read_series_csv

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    series_list = [read_series_csv(p)[0] for p in args.series]
    profiles = daily_profiles(series_list)
    for key, profile in profiles.items():
        write_profile_csv(profile, out / f"profile_{key}.csv")
        if not args.no_figures:
            from .figures import plot_daily_profile
            plot_daily_profile(profile, out / f"profile_{key}.png",
                               title=f"daily profile: {key}")
    print(f"{len(profiles)} profile(s) written")


def _cmd_run(args) -> None:
    from .experiment import ExperimentConfig, run_experiment

    config = ExperimentConfig.from_json(args.config)
    manifest = run_experiment(config)
    print(f"run complete: {len(manifest.artifacts)} artifact(s), "
          f"manifest at {Path(config.out_dir) / 'manifest.json'}")


def _cmd_adapt(args) -> None:
    from .adapter import adapt_external_dataset

    summary = adapt_external_dataset(args.mapping, args.out)
    print(json.dumps(summary, indent=2))


_COMMANDS = {
    "synth": _cmd_synth,
    "ingest": _cmd_ingest,
    "preprocess": _cmd_preprocess,
    "label": _cmd_label,
    "features": _cmd_features,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "select": _cmd_select,
    "automl": _cmd_automl,
    "profile": _cmd_profile,
    "run": _cmd_run,
    "adapt": _cmd_adapt,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PhytosenseError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # stage failures surface with context
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
