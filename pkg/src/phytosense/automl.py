"""Two-phase greedy pipeline search maximizing validation macro F1.

Phase (a) evaluates every valid (scaling, feature, classifier) combination
with default hyperparameters on a fixed stratified validation hold-out;
phase (b) random-searches the winner's hyperparameter schema for up to
``budget`` draws, stopping early after ``patience`` consecutive draws with
no strict improvement (> 1e-12).  The best configuration is retrained on the
full training input and returned.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import learn
from .errors import NoValidCandidate
from .evaluation import macro_f1, minority_label
from .features import apply_minmax, fit_minmax
from .learn.base import derive_seed
from .resample import SmoteConfig, smote_arrays

IMPROVEMENT_EPS = 1e-12

SCALING_OPTIONS: tuple[str | None, ...] = (None, "normalizer", "standardizer", "minmax")
FEATURE_OPTIONS: tuple[tuple[str, ...], ...] = (
    (), ("variance_threshold",), ("pca",), ("variance_threshold", "pca"))
CLASSIFIER_OPTIONS: tuple[str, ...] = (
    "gaussian_nb", "qda", "knn", "linear_svm",
    "decision_tree", "random_forest", "extra_trees", "mlp")


@dataclass(frozen=True)
class SearchSpace:
    scaling: tuple[str | None, ...] = SCALING_OPTIONS
    feature: tuple[tuple[str, ...], ...] = FEATURE_OPTIONS
    classifier: tuple[str, ...] = CLASSIFIER_OPTIONS

    def combos(self) -> list[tuple[str | None, tuple[str, ...], str]]:
        """Every candidate in lexicographic slot order."""
        return [(s, f, c)
                for s in self.scaling for f in self.feature for c in self.classifier]


@dataclass
class TraceEntry:
    phase: str  # "a" or "b"
    index: int
    scaling: str | None
    feature: tuple[str, ...]
    classifier: str
    hyperparams: dict
    val_macro_f1: float
    best_so_far: float
    seconds: float

    def to_dict(self) -> dict:
        return {"phase": self.phase, "index": self.index, "scaling": self.scaling,
                "feature": list(self.feature), "classifier": self.classifier,
                "hyperparams": self.hyperparams, "val_macro_f1": self.val_macro_f1,
                "best_so_far": self.best_so_far, "seconds": self.seconds}


@dataclass
class SearchTrace:
    entries: list[TraceEntry] = field(default_factory=list)
    discards: list[dict] = field(default_factory=list)
    winner: dict | None = None
    stopped_early: bool = False

    def phase_entries(self, phase: str) -> list[TraceEntry]:
        return [e for e in self.entries if e.phase == phase]

    def write_jsonl(self, path: str | Path) -> None:
        lines = [json.dumps(e.to_dict()) for e in self.entries]
        lines += [json.dumps({"discard": d}) for d in self.discards]
        if self.winner is not None:
            lines.append(json.dumps({"winner": self.winner,
                                     "stopped_early": self.stopped_early}))
        Path(path).write_text("\n".join(lines) + "\n")


def _candidate_specs(scaling, feature, classifier, hyperparams, seed):
    transform_specs = []
    if scaling is not None:
        transform_specs.append(learn.TransformSpec(scaling, {}))
    for stage in feature:
        transform_specs.append(learn.TransformSpec(stage, hyperparams.get(stage, {})))
    classifier_spec = learn.ClassifierSpec(classifier,
                                           hyperparams.get(classifier, {}), seed)
    return transform_specs, classifier_spec


def _stratified_holdout(y: np.ndarray, fraction: float, seed: int):
    rng = np.random.default_rng(derive_seed(seed, 201))
    val: list[int] = []
    for cls in sorted(np.unique(y).tolist()):
        rows = np.flatnonzero(y == cls)
        n_val = min(max(int(round(fraction * len(rows))), 1), len(rows) - 1)
        val.extend(rows[rng.permutation(len(rows))[:n_val]].tolist())
    val_idx = np.array(sorted(val), dtype=int)
    train_idx = np.setdiff1d(np.arange(len(y)), val_idx)
    return train_idx, val_idx


def search(X_train: np.ndarray, y_train: np.ndarray, budget: int = 1024,
           patience: int = 100, seed: int = 0,
           space: SearchSpace | None = None,
           smote_cfg: SmoteConfig | None = None,
           validation_fraction: float = 0.2) -> tuple[learn.TrainedPipeline, SearchTrace]:
    """Greedy two-phase pipeline search; deterministic for a fixed seed.

    Data treatment mirrors the manual protocol: the internal validation
    hold-out is fixed once, min-max scaling is fitted on the internal
    training fold, and SMOTE (when configured) rebalances that fold only.
    Candidates whose fit raises are discarded with the reason logged.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    space = space or SearchSpace()
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train)
    positive = minority_label(y_train)
    classes = sorted(np.unique(y_train).tolist())

    fit_idx, val_idx = _stratified_holdout(y_train, validation_fraction, seed)
    X_fit, y_fit = X_train[fit_idx], y_train[fit_idx]
    X_val, y_val = X_train[val_idx], y_train[val_idx]
    params = fit_minmax(X_fit)
    X_fit = apply_minmax(params, X_fit)
    X_val = apply_minmax(params, X_val)
    if smote_cfg is not None:
        cfg = SmoteConfig(k_neighbors=smote_cfg.k_neighbors,
                          rng_seed=derive_seed(smote_cfg.rng_seed, seed, 202))
        X_fit, y_fit, _ = smote_arrays(X_fit, y_fit, cfg)

    trace = SearchTrace()

    def evaluate(scaling, feature, classifier, hyperparams, entry_seed):
        transform_specs, classifier_spec = _candidate_specs(
            scaling, feature, classifier, hyperparams, entry_seed)
        model = learn.fit(classifier_spec, transform_specs, X_fit, y_fit,
                          positive_label=positive)
        return macro_f1(y_val, model.predict(X_val), classes)

    # ---- phase (a): every valid combination at default hyperparameters ----
    phase_a: list[tuple[float, int, tuple]] = []
    for combo_index, (scaling, feature, classifier) in enumerate(space.combos()):
        started = time.perf_counter()
        try:
            score = evaluate(scaling, feature, classifier, {},
                             derive_seed(seed, 203, combo_index))
        except Exception as exc:  # invalid combination on this data
            trace.discards.append({"scaling": scaling, "feature": list(feature),
                                   "classifier": classifier,
                                   "reason": f"{type(exc).__name__}: {exc}"})
            continue
        best_so_far = max([score] + [s for s, _, _ in phase_a])
        trace.entries.append(TraceEntry(
            phase="a", index=combo_index, scaling=scaling, feature=feature,
            classifier=classifier, hyperparams={}, val_macro_f1=score,
            best_so_far=best_so_far, seconds=time.perf_counter() - started))
        phase_a.append((score, combo_index, (scaling, feature, classifier)))

    if not phase_a:
        raise NoValidCandidate("every combination was discarded")

    def n_stages(combo):
        scaling, feature, _ = combo
        return (scaling is not None) + len(feature)

    phase_a.sort(key=lambda item: (-item[0], n_stages(item[2]), item[1]))
    best_score, _, best_combo = phase_a[0]
    scaling, feature, classifier = best_combo
    best_hyperparams: dict = {}

    # ---- phase (b): random search over the winner's schema ----------------
    rng = np.random.default_rng(derive_seed(seed, 204))
    stall = 0
    for draw in range(budget):
        hyperparams = {classifier: learn.sample_classifier_params(classifier, rng)}
        for stage in feature:
            stage_params = learn.sample_transform_params(stage, rng)
            if stage_params:
                hyperparams[stage] = stage_params
        started = time.perf_counter()
        try:
            score = evaluate(scaling, feature, classifier, hyperparams,
                             derive_seed(seed, 205, draw))
        except Exception as exc:
            trace.discards.append({"scaling": scaling, "feature": list(feature),
                                   "classifier": classifier, "phase": "b",
                                   "reason": f"{type(exc).__name__}: {exc}"})
            score = float("-inf")
        if score > best_score + IMPROVEMENT_EPS:
            best_score = score
            best_hyperparams = hyperparams
            stall = 0
        else:
            stall += 1
        if np.isfinite(score):
            trace.entries.append(TraceEntry(
                phase="b", index=draw, scaling=scaling, feature=feature,
                classifier=classifier, hyperparams=hyperparams,
                val_macro_f1=score, best_so_far=best_score,
                seconds=time.perf_counter() - started))
        if stall >= patience:
            trace.stopped_early = True
            break

    # ---- final retrain on the full training input -------------------------
    full_params = fit_minmax(X_train)
    X_full = apply_minmax(full_params, X_train)
    y_full = y_train
    if smote_cfg is not None:
        cfg = SmoteConfig(k_neighbors=smote_cfg.k_neighbors,
                          rng_seed=derive_seed(smote_cfg.rng_seed, seed, 206))
        X_full, y_full, _ = smote_arrays(X_full, y_full, cfg)
    transform_specs, classifier_spec = _candidate_specs(
        scaling, feature, classifier, best_hyperparams, derive_seed(seed, 207))
    model = learn.fit(classifier_spec, transform_specs, X_full, y_full,
                      positive_label=positive)
    # prepend the dataset min-max so predict consumes raw feature rows
    minmax_spec = learn.TransformSpec("minmax", {})
    minmax_transform = learn.build_transform(minmax_spec)
    minmax_transform.params_ = full_params
    model.transforms.insert(0, minmax_transform)
    model.transform_specs.insert(0, minmax_spec)

    trace.winner = {"scaling": scaling, "feature": list(feature),
                    "classifier": classifier, "hyperparams": best_hyperparams,
                    "val_macro_f1": best_score}
    return model, trace
