"""Experiment configuration, stage runners, and the full pipeline driver.

Every stage reads and writes the documented file formats, so stages compose
through the filesystem and a run can resume from any serialized artifact.
Metric outputs contain no wall-clock data; rerunning with identical seeds
rewrites them byte-identically.  Durations live only in the run manifest.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, automl, learn
from .errors import ConfigError, DegenerateSeries
from .evaluation import (DailyProfile, EvalReport, SplitPlan, compute_daily_profile,
                         evaluate_task, holdout_split, macro_f1, minority_label,
                         write_pr_csv, write_profile_csv)
from .features import (CATALOG_VERSION, FeatureMatrix, build_feature_matrix,
                       get_catalog, write_feature_csv)
from .ingest import (MS_PER_DAY, CoverageReport, EnvSeries, RawTrace,
                     coverage_filter, parse_env_csv, parse_trace_csv)
from .labeling import (STANDARD_RULES, LabeledWindow, SkipReport, extract_windows,
                       write_skip_report, write_windows_csv)
from .preprocess import (UniformSeries, downsample_mean,
                         interpolate_within_retained_days, write_series_csv,
                         zscore)
from .resample import SmoteConfig
from .select import mutual_information, sweep_top_k, write_mi_csv, write_sweep_csv
from .synth import SynthSpec, generate_synthetic

CLASSIFIER_ALIASES = {
    "nb": "gaussian_nb", "gaussian_nb": "gaussian_nb",
    "qda": "qda",
    "knn": "knn",
    "svm": "linear_svm", "linear_svm": "linear_svm",
    "dt": "decision_tree", "decision_tree": "decision_tree",
    "rf": "random_forest", "random_forest": "random_forest",
    "etc": "extra_trees", "extra_trees": "extra_trees",
    "mlp": "mlp",
}


def resolve_classifier(name: str) -> str:
    try:
        return CLASSIFIER_ALIASES[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown classifier {name!r}") from None


@dataclass
class ExperimentConfig:
    seed: int
    out_dir: str
    tasks: list[str] = field(default_factory=lambda: list(STANDARD_RULES))
    synthetic: dict | None = None  # SynthSpec keyword overrides
    trace_paths: list[str] = field(default_factory=list)
    env_path: str | None = None
    channel: str | None = None  # None = both channels combined
    zscore: bool = False  # opt-in signal normalization for classification
    label_mode: str = "purity"  # or "majority"
    smote: bool = True
    smote_k: int = 5
    catalog_version: str = CATALOG_VERSION
    classifiers: list[str] = field(default_factory=lambda: ["random_forest"])
    classifier_params: dict = field(default_factory=dict)  # per resolved kind
    automl_budget: int = 1024
    automl_patience: int = 100
    sweep_k: int = 0  # 0 disables the selection sweep
    sweep_classifier: str = "random_forest"
    local_utc_offset_hours: int = 0
    figures: bool = True

    def __post_init__(self):
        if self.seed is None:
            raise ConfigError("seed is mandatory (no wall-clock seeding)")
        unknown = set(self.tasks) - set(STANDARD_RULES)
        if unknown:
            raise ConfigError(f"unknown tasks: {sorted(unknown)}")
        if self.channel not in (None, "stem", "leaf"):
            raise ConfigError(f"channel must be stem/leaf, got {self.channel!r}")
        if self.label_mode not in ("purity", "majority"):
            raise ConfigError(f"label_mode must be purity/majority, "
                              f"got {self.label_mode!r}")
        self.classifiers = [c if c == "automl" else resolve_classifier(c)
                            for c in self.classifiers]
        self.sweep_classifier = resolve_classifier(self.sweep_classifier)
        if self.synthetic is None and not self.trace_paths:
            raise ConfigError("either synthetic parameters or trace_paths required")

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from None
        if "seed" not in raw:
            raise ConfigError("seed is mandatory (no wall-clock seeding)")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    def canonical_dict(self) -> dict:
        return {name: getattr(self, name) for name in sorted(self.__dataclass_fields__)}

    def config_hash(self) -> str:
        canonical = json.dumps(self.canonical_dict(), sort_keys=True,
                               separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class RunManifest:
    config_hash: str
    catalog_version: str
    software_version: str
    seed: int = 0
    stages: list[dict] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)

    def add_stage(self, name: str, seconds: float) -> None:
        self.stages.append({"name": name, "seconds": seconds})

    def add_artifact(self, path: str | Path) -> None:
        self.artifacts.append(str(path))

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps({
            "config_hash": self.config_hash,
            "catalog_version": self.catalog_version,
            "software_version": self.software_version,
            "seed": self.seed,
            "stages": self.stages,
            "artifacts": sorted(self.artifacts),
        }, indent=2))


class StageError(Exception):
    """Carries the failing stage name for CLI error reporting."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# stage helpers (used by both run_experiment and the CLI subcommands)
# ---------------------------------------------------------------------------

def preprocess_trace(trace: RawTrace, day_offset_ms: int = 0,
                     ) -> tuple[UniformSeries, CoverageReport]:
    """Downsample to 1 Hz, drop low-coverage days, interpolate retained runs."""
    series = downsample_mean(trace, 1.0)
    filtered, report = coverage_filter(series, 1.0, day_offset_ms=day_offset_ms)
    cleaned = interpolate_within_retained_days(filtered, report,
                                               day_offset_ms=day_offset_ms)
    return cleaned, report


def label_series(series_list: list[UniformSeries], env: EnvSeries, task: str,
                 utc_offset_hours: int = 0, mode: str = "purity",
                 ) -> tuple[list[LabeledWindow], dict[str, SkipReport]]:
    rule = STANDARD_RULES[task]
    windows: list[LabeledWindow] = []
    skips: dict[str, SkipReport] = {}
    for series in series_list:
        w, report = extract_windows(series, env, rule,
                                    utc_offset_hours=utc_offset_hours, mode=mode)
        windows.extend(w)
        skips[f"{series.plant_id}/{series.channel}"] = report
    return windows, skips


def matrix_for_task(windows: list[LabeledWindow],
                    catalog_version: str = CATALOG_VERSION) -> FeatureMatrix:
    return build_feature_matrix(windows, get_catalog(catalog_version))


def evaluate_matrix(matrix: FeatureMatrix, classifier_kind: str,
                    classifier_params: dict | None = None,
                    seed: int = 0, smote: bool = True, smote_k: int = 5,
                    task: str = "") -> EvalReport:
    spec = learn.ClassifierSpec(classifier_kind, classifier_params or {}, seed)
    smote_cfg = SmoteConfig(k_neighbors=smote_k, rng_seed=seed) if smote else None
    return evaluate_task(matrix.features, matrix.labels, spec,
                         plan=SplitPlan(seed=seed), smote_cfg=smote_cfg,
                         task=task)


def automl_on_matrix(matrix: FeatureMatrix, budget: int, patience: int,
                     seed: int, smote: bool = True, smote_k: int = 5,
                     task: str = "") -> tuple[learn.TrainedPipeline, automl.SearchTrace, dict]:
    """Hold out the fixed test set, search on the pool, score the winner."""
    y = matrix.labels
    pool_idx, test_idx = holdout_split(y, 0.2, seed)
    smote_cfg = SmoteConfig(k_neighbors=smote_k, rng_seed=seed) if smote else None
    pipeline, trace = automl.search(matrix.features[pool_idx], y[pool_idx],
                                    budget=budget, patience=patience, seed=seed,
                                    smote_cfg=smote_cfg)
    classes = sorted(np.unique(y).tolist())
    test_pred = pipeline.predict(matrix.features[test_idx])
    report = {
        "task": task,
        "winner": trace.winner,
        "n_phase_a": len(trace.phase_entries("a")),
        "n_phase_b": len(trace.phase_entries("b")),
        "n_discarded": len(trace.discards),
        "stopped_early": trace.stopped_early,
        "test_macro_f1": macro_f1(y[test_idx], test_pred, classes),
        "n_test": int(len(test_idx)),
        "seed": seed,
    }
    return pipeline, trace, report


def train_on_matrix(matrix: FeatureMatrix, classifier_kind: str,
                    classifier_params: dict | None = None, seed: int = 0,
                    smote: bool = True, smote_k: int = 5) -> learn.TrainedPipeline:
    """Fit one pipeline (min-max + classifier) on every row of a matrix."""
    from .features import fit_minmax
    from .resample import smote_arrays

    X, y = matrix.features, matrix.labels
    positive = minority_label(y)
    params = fit_minmax(X)
    minmax_spec = learn.TransformSpec("minmax", {})
    minmax_transform = learn.build_transform(minmax_spec)
    minmax_transform.params_ = params
    X_fit = minmax_transform.transform(X)
    y_fit = y
    if smote:
        X_fit, y_fit, _ = smote_arrays(X_fit, y_fit,
                                       SmoteConfig(k_neighbors=smote_k, rng_seed=seed))
    spec = learn.ClassifierSpec(classifier_kind, classifier_params or {}, seed)
    pipeline = learn.fit(spec, [], X_fit, y_fit, positive_label=positive)
    pipeline.transforms.insert(0, minmax_transform)
    pipeline.transform_specs.insert(0, minmax_spec)
    return pipeline


def daily_profiles(series_list: list[UniformSeries],
                   reports: dict[str, CoverageReport] | None = None,
                   day_offset_ms: int = 0) -> dict[str, DailyProfile]:
    """Per (plant, channel): z-score the retained series and stack whole days."""
    profiles: dict[str, DailyProfile] = {}
    for series in series_list:
        key = f"{series.plant_id}_{series.channel}"
        try:
            normalized, _ = zscore(series)
        except DegenerateSeries:
            continue
        retained = (reports[key].retained_days()
                    if reports is not None and key in reports else None)
        days = []
        ts = normalized.timestamps_ms()
        day_indices = np.unique((ts + day_offset_ms) // MS_PER_DAY)
        from .ingest import _day_label

        for day in day_indices:
            if retained is not None and _day_label(int(day)) not in retained:
                continue
            start = day * MS_PER_DAY - day_offset_ms
            offset = (start - normalized.start_ms) // normalized.step_ms
            if offset < 0 or offset + 86_400 > len(normalized.values):
                continue
            segment = normalized.values[offset:offset + 86_400]
            if np.isfinite(segment).all():
                days.append(segment)
        if days:
            profiles[key] = compute_daily_profile(days, channel=series.channel,
                                                  plants=(series.plant_id,))
    return profiles


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

def run_experiment(config: ExperimentConfig) -> RunManifest:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lock = out / ".lock"
    try:
        lock.touch(exist_ok=False)
    except FileExistsError:
        raise ConfigError(f"output directory is locked by another run: {lock}")

    manifest = RunManifest(config_hash=config.config_hash(),
                           catalog_version=config.catalog_version,
                           software_version=__version__, seed=config.seed)
    try:
        _run_stages(config, out, manifest)
    finally:
        lock.unlink(missing_ok=True)
    manifest.write(out / "manifest.json")
    return manifest


def _figures_module():
    from . import figures
    return figures


def _run_stages(config: ExperimentConfig, out: Path, manifest: RunManifest) -> None:
    day_offset_ms = config.local_utc_offset_hours * 3_600_000

    def stage(name):
        class _Timer:
            def __enter__(self):
                self.started = time.perf_counter()
                return self

            def __exit__(self, exc_type, exc, tb):
                if exc is None:
                    manifest.add_stage(name, time.perf_counter() - self.started)
                elif not isinstance(exc, StageError):
                    raise StageError(name, exc) from exc
        return _Timer()

    trace_paths = list(config.trace_paths)
    env_path = config.env_path
    if config.synthetic is not None:
        with stage("synth"):
            spec = SynthSpec(**config.synthetic)
            synth_out = out / "synth"
            synth_manifest = generate_synthetic(spec, config.seed, synth_out)
            trace_paths = synth_manifest["trace_paths"]
            env_path = synth_manifest["env_path"]
            manifest.add_artifact(synth_out / "synth_manifest.json")

    with stage("ingest"):
        if env_path is None:
            raise ConfigError("env_path required")
        for p in trace_paths:
            if not Path(p).exists():
                raise ConfigError(f"trace file not found: {p}")
        if not Path(env_path).exists():
            raise ConfigError(f"env file not found: {env_path}")
        traces = [parse_trace_csv(p) for p in trace_paths]
        env = parse_env_csv(env_path)

    with stage("preprocess"):
        series_list: list[UniformSeries] = []
        coverage_reports: dict[str, CoverageReport] = {}
        pre_dir = out / "preprocessed"
        pre_dir.mkdir(exist_ok=True)
        for trace in traces:
            cleaned, report = preprocess_trace(trace, day_offset_ms)
            key = f"{trace.plant_id}_{trace.channel}"
            series_list.append(cleaned)
            coverage_reports[key] = report
            series_path = pre_dir / f"series_{key}.csv"
            write_series_csv(cleaned, series_path)
            (pre_dir / f"coverage_{key}.json").write_text(report.to_json())
            manifest.add_artifact(series_path)
            manifest.add_artifact(pre_dir / f"coverage_{key}.json")
        if config.channel is not None:
            labeled_inputs = [s for s in series_list if s.channel == config.channel]
        else:
            labeled_inputs = series_list
        if config.zscore:  # opt-in; min-max on features is the default route
            labeled_inputs = [zscore(s)[0] for s in labeled_inputs]

    matrices: dict[str, FeatureMatrix] = {}
    with stage("label+features"):
        for task in config.tasks:
            windows, skips = label_series(labeled_inputs, env, task,
                                          config.local_utc_offset_hours,
                                          mode=config.label_mode)
            task_dir = out / task
            task_dir.mkdir(exist_ok=True)
            write_windows_csv(windows, task_dir / "windows.csv")
            write_skip_report(skips, task_dir / "skip_report.json")
            manifest.add_artifact(task_dir / "windows.csv")
            manifest.add_artifact(task_dir / "skip_report.json")
            if not windows:
                continue
            matrix = matrix_for_task(windows, config.catalog_version)
            write_feature_csv(matrix, task_dir / "features.csv")
            manifest.add_artifact(task_dir / "features.csv")
            matrices[task] = matrix

    pr_curves_by_classifier: dict[str, dict] = {}
    with stage("evaluate"):
        for task, matrix in matrices.items():
            task_dir = out / task
            for classifier in config.classifiers:
                if classifier == "automl":
                    continue
                params = config.classifier_params.get(classifier, {})
                report = evaluate_matrix(matrix, classifier, params,
                                         seed=config.seed, smote=config.smote,
                                         smote_k=config.smote_k, task=task)
                report_path = task_dir / f"eval_{classifier}.json"
                report_path.write_text(report.to_json())
                write_pr_csv(report.pr_points, task_dir / f"pr_{classifier}.csv")
                manifest.add_artifact(report_path)
                manifest.add_artifact(task_dir / f"pr_{classifier}.csv")
                pr_curves_by_classifier.setdefault(classifier, {})[task] = (
                    report.pr_points, report.pr_auc, report.baseline)

    if "automl" in config.classifiers:
        with stage("automl"):
            for task, matrix in matrices.items():
                task_dir = out / task
                pipeline, trace, report = automl_on_matrix(
                    matrix, config.automl_budget, config.automl_patience,
                    config.seed, config.smote, config.smote_k, task)
                trace.write_jsonl(task_dir / "automl_trace.jsonl")
                pipeline.save(task_dir / "automl_pipeline.json")
                (task_dir / "automl_report.json").write_text(
                    json.dumps(report, indent=2))
                for name in ("automl_trace.jsonl", "automl_pipeline.json",
                             "automl_report.json"):
                    manifest.add_artifact(task_dir / name)
                if config.figures:
                    _figures_module().plot_search_trace(
                        [e.best_so_far for e in trace.entries],
                        task_dir / "automl_trace.png", title=f"search: {task}")
                    manifest.add_artifact(task_dir / "automl_trace.png")

    if config.sweep_k > 0:
        with stage("select"):
            for task, matrix in matrices.items():
                task_dir = out / task
                scores = mutual_information(matrix.features, matrix.labels,
                                            feature_names=matrix.feature_names)
                write_mi_csv(scores, task_dir / "mi_ranking.csv")
                spec = learn.ClassifierSpec(
                    config.sweep_classifier,
                    config.classifier_params.get(config.sweep_classifier, {}),
                    config.seed)
                smote_cfg = (SmoteConfig(k_neighbors=config.smote_k,
                                         rng_seed=config.seed)
                             if config.smote else None)
                sweep = sweep_top_k(matrix.features, matrix.labels, spec,
                                    K=min(config.sweep_k, matrix.features.shape[1]),
                                    plan=SplitPlan(seed=config.seed),
                                    smote_cfg=smote_cfg,
                                    feature_names=matrix.feature_names)
                write_sweep_csv(sweep, task_dir / "selection_sweep.csv")
                manifest.add_artifact(task_dir / "mi_ranking.csv")
                manifest.add_artifact(task_dir / "selection_sweep.csv")
                if config.figures:
                    _figures_module().plot_selection_sweep(
                        sweep, task_dir / "selection_sweep.png",
                        title=f"selection sweep: {task}")
                    manifest.add_artifact(task_dir / "selection_sweep.png")

    with stage("profile"):
        profiles = daily_profiles(series_list, coverage_reports, day_offset_ms)
        profile_dir = out / "profiles"
        profile_dir.mkdir(exist_ok=True)
        for key, profile in profiles.items():
            write_profile_csv(profile, profile_dir / f"profile_{key}.csv")
            manifest.add_artifact(profile_dir / f"profile_{key}.csv")
            if config.figures:
                _figures_module().plot_daily_profile(
                    profile, profile_dir / f"profile_{key}.png",
                    title=f"daily profile: {key}")
                manifest.add_artifact(profile_dir / f"profile_{key}.png")

    if config.figures and pr_curves_by_classifier:
        with stage("figures"):
            for classifier, curves in pr_curves_by_classifier.items():
                path = out / f"pr_curves_{classifier}.png"
                _figures_module().plot_pr_curves(curves, path)
                manifest.add_artifact(path)
