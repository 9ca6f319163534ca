"""Splitting protocol, macro F1, PR curves, and time-of-day profiles.

The protocol holds out a fixed stratified 20% test set, then draws ten
stratified shuffle splits (train/validation) from the remaining pool.
Min-max scaling is fitted per split on its training fold only, and SMOTE is
applied to the training fold only.  Both validation-fold and test-set macro
F1 are reported (mean +/- population std over the ten splits).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import learn
from .errors import ClassTooSmall, LengthMismatch, NoDays, SingleClassInput
from .features import apply_minmax, fit_minmax
from .learn.base import derive_seed
from .resample import SmoteConfig, smote_arrays


@dataclass(frozen=True)
class SplitPlan:
    test_fraction: float = 0.2
    n_splits: int = 10
    validation_fraction: float = 0.2
    seed: int = 0


def _stratified_pick(labels: np.ndarray, fraction: float,
                     rng: np.random.Generator) -> np.ndarray:
    """Indices of a stratified sample; each class contributes round(f*n_c),
    clipped so both sides keep at least one row."""
    picked: list[int] = []
    for cls in sorted(np.unique(labels).tolist()):
        rows = np.flatnonzero(labels == cls)
        if len(rows) < 2:
            raise ClassTooSmall(f"class {cls!r} has {len(rows)} sample(s)")
        n_pick = int(round(fraction * len(rows)))
        n_pick = min(max(n_pick, 1), len(rows) - 1)
        order = rng.permutation(len(rows))[:n_pick]
        picked.extend(rows[order].tolist())
    return np.array(sorted(picked), dtype=int)


def holdout_split(labels: np.ndarray, fraction: float,
                  seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed stratified (pool, test) index split."""
    rng = np.random.default_rng(derive_seed(seed, 100))
    test = _stratified_pick(np.asarray(labels), fraction, rng)
    pool = np.setdiff1d(np.arange(len(labels)), test)
    return pool, test


def stratified_shuffle_splits(labels: np.ndarray,
                              plan: SplitPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    """Ten (train, validation) index pairs preserving class proportions."""
    labels = np.asarray(labels)
    splits = []
    for i in range(plan.n_splits):
        rng = np.random.default_rng(derive_seed(plan.seed, 101, i))
        val = _stratified_pick(labels, plan.validation_fraction, rng)
        train = np.setdiff1d(np.arange(len(labels)), val)
        splits.append((train, val))
    return splits


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _class_pair(y_true, y_pred, classes):
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} vs {len(y_pred)}")
    if classes is None:
        classes = sorted(set(np.asarray(y_true).tolist())
                         | set(np.asarray(y_pred).tolist()))
    return list(classes)


def confusion_counts(y_true, y_pred, classes=None) -> dict:
    """Per-class TP/FP/FN/TN counts."""
    classes = _class_pair(y_true, y_pred, classes)
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    out = {}
    for cls in classes:
        tp = int(np.sum((y_true == cls) & (y_pred == cls)))
        fp = int(np.sum((y_true != cls) & (y_pred == cls)))
        fn = int(np.sum((y_true == cls) & (y_pred != cls)))
        tn = len(y_true) - tp - fp - fn
        out[cls] = {"tp": tp, "fp": fp, "fn": fn, "tn": tn}
    return out


def macro_f1(y_true, y_pred, classes=None) -> float:
    """Unweighted mean of per-class F1, in percent; 0/0 counts as 0."""
    counts = confusion_counts(y_true, y_pred, classes)
    f1s = []
    for cls, c in counts.items():
        precision = c["tp"] / (c["tp"] + c["fp"]) if c["tp"] + c["fp"] > 0 else 0.0
        recall = c["tp"] / (c["tp"] + c["fn"]) if c["tp"] + c["fn"] > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        f1s.append(f1)
    return 100.0 * sum(f1s) / len(f1s)


def per_class_recall(y_true, y_pred, classes=None) -> dict:
    counts = confusion_counts(y_true, y_pred, classes)
    return {cls: (c["tp"] / (c["tp"] + c["fn"]) if c["tp"] + c["fn"] > 0 else 0.0)
            for cls, c in counts.items()}


def pr_curve(y_true, scores, positive) -> tuple[list[tuple[float, float, float]], float]:
    """Precision-recall points per distinct threshold, plus step-rule AUC.

    Points are (threshold, precision, recall) sorted by descending threshold,
    starting from the (inf, 1, 0) anchor.  AUC follows the right-continuous
    step rule sum((R_i - R_{i-1}) * P_i); no linear interpolation.
    """
    y_true = np.asarray(y_true)
    scores = np.asarray(scores, dtype=float)
    if len(y_true) != len(scores):
        raise LengthMismatch(f"{len(y_true)} vs {len(scores)}")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    is_pos = y_true == positive
    n_pos = int(is_pos.sum())
    if n_pos == 0 or n_pos == len(y_true):
        raise SingleClassInput("PR curve needs both classes present")

    points = [(float("inf"), 1.0, 0.0)]
    for threshold in np.unique(scores)[::-1].tolist():
        pred = scores >= threshold
        tp = int(np.sum(pred & is_pos))
        fp = int(np.sum(pred & ~is_pos))
        precision = tp / (tp + fp)
        recall = tp / n_pos
        points.append((threshold, precision, recall))

    auc = 0.0
    prev_recall = 0.0
    for _, precision, recall in points[1:]:
        auc += (recall - prev_recall) * precision
        prev_recall = recall
    return points, auc


# ---------------------------------------------------------------------------
# daily profile
# ---------------------------------------------------------------------------

@dataclass
class DailyProfile:
    """Pointwise mean/std across days for each second of the day."""

    mean: np.ndarray
    std: np.ndarray
    n_days: int
    channel: str = ""
    plants: tuple[str, ...] = ()


def compute_daily_profile(day_series: list[np.ndarray], channel: str = "",
                          plants: tuple[str, ...] = ()) -> DailyProfile:
    if not day_series:
        raise NoDays("no day series supplied")
    lengths = {len(day) for day in day_series}
    if len(lengths) != 1:
        raise ValueError(f"days differ in length: {sorted(lengths)}")
    stacked = np.vstack(day_series)
    return DailyProfile(mean=stacked.mean(axis=0), std=stacked.std(axis=0),
                        n_days=len(day_series), channel=channel, plants=plants)


def write_profile_csv(profile: DailyProfile, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["second_of_day", "mean", "std"])
        for i, (m, s) in enumerate(zip(profile.mean.tolist(), profile.std.tolist())):
            writer.writerow([i, repr(m), repr(s)])


# ---------------------------------------------------------------------------
# evaluation protocol
# ---------------------------------------------------------------------------

@dataclass
class EvalReport:
    task: str
    classifier_kind: str
    positive_label: str
    baseline: float  # positive prevalence of the scored (test) set
    val_macro_f1_mean: float
    val_macro_f1_std: float
    test_macro_f1_mean: float
    test_macro_f1_std: float
    val_macro_f1_per_split: list[float]
    test_macro_f1_per_split: list[float]
    recall_per_class: dict
    confusion: dict  # summed over splits' test predictions
    pr_points: list[tuple[float, float, float]]
    pr_auc: float
    n_rows: int
    n_test: int
    class_counts: dict
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "classifier": self.classifier_kind,
            "positive_label": self.positive_label,
            "baseline": self.baseline,
            "macro_f1": {
                "validation_mean": self.val_macro_f1_mean,
                "validation_std": self.val_macro_f1_std,
                "test_mean": self.test_macro_f1_mean,
                "test_std": self.test_macro_f1_std,
                "validation_per_split": self.val_macro_f1_per_split,
                "test_per_split": self.test_macro_f1_per_split,
            },
            "recall_per_class": self.recall_per_class,
            "confusion": self.confusion,
            "pr_auc": self.pr_auc,
            "n_rows": self.n_rows,
            "n_test": self.n_test,
            "class_counts": self.class_counts,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def write_pr_csv(points: list[tuple[float, float, float]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "precision", "recall"])
        for threshold, precision, recall in points:
            writer.writerow([repr(threshold), repr(precision), repr(recall)])


def minority_label(y: np.ndarray):
    classes, counts = np.unique(np.asarray(y), return_counts=True)
    if len(classes) != 2:
        raise SingleClassInput(f"need 2 classes, got {len(classes)}")
    return classes[1] if counts[0] == counts[1] else classes[np.argmin(counts)]


def evaluate_task(X: np.ndarray, y: np.ndarray, classifier_spec: learn.ClassifierSpec,
                  transform_specs: list[learn.TransformSpec] | None = None,
                  plan: SplitPlan | None = None,
                  smote_cfg: SmoteConfig | None = None,
                  minmax: bool = True, positive_label=None,
                  task: str = "") -> EvalReport:
    """Run the full split/normalize/rebalance/train/score protocol."""
    plan = plan or SplitPlan()
    transform_specs = list(transform_specs or [])
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    positive = positive_label if positive_label is not None else minority_label(y)

    pool_idx, test_idx = holdout_split(y, plan.test_fraction, plan.seed)
    X_pool, y_pool = X[pool_idx], y[pool_idx]
    X_test, y_test = X[test_idx], y[test_idx]
    classes = sorted(np.unique(y).tolist())

    val_scores, test_scores = [], []
    summed_scores = np.zeros(len(test_idx))
    confusion_sum = {cls: {"tp": 0, "fp": 0, "fn": 0, "tn": 0} for cls in classes}

    for i, (train, val) in enumerate(stratified_shuffle_splits(y_pool, plan)):
        X_train, y_train = X_pool[train], y_pool[train]
        X_val, y_val = X_pool[val], y_pool[val]
        if minmax:
            params = fit_minmax(X_train)
            X_train = apply_minmax(params, X_train)
            X_val = apply_minmax(params, X_val)
            X_test_i = apply_minmax(params, X_test)
        else:
            X_test_i = X_test
        if smote_cfg is not None:
            cfg = SmoteConfig(k_neighbors=smote_cfg.k_neighbors,
                              rng_seed=derive_seed(smote_cfg.rng_seed, plan.seed, i))
            X_train, y_train, _ = smote_arrays(X_train, y_train, cfg)
        spec = classifier_spec.with_seed(
            derive_seed(classifier_spec.seed, plan.seed, i))
        model = learn.fit(spec, transform_specs, X_train, y_train,
                          positive_label=positive)
        val_scores.append(macro_f1(y_val, model.predict(X_val), classes))
        test_pred = model.predict(X_test_i)
        test_scores.append(macro_f1(y_test, test_pred, classes))
        summed_scores += model.predict_score(X_test_i)
        for cls, c in confusion_counts(y_test, test_pred, classes).items():
            for key in c:
                confusion_sum[cls][key] += c[key]

    mean_scores = summed_scores / plan.n_splits
    points, auc = pr_curve(y_test, mean_scores, positive)
    recalls = {cls: (c["tp"] / (c["tp"] + c["fn"]) if c["tp"] + c["fn"] > 0 else 0.0)
               for cls, c in confusion_sum.items()}
    class_counts = {str(cls): int(np.sum(y == cls)) for cls in classes}

    return EvalReport(
        task=task,
        classifier_kind=classifier_spec.kind,
        positive_label=str(positive),
        baseline=float(np.mean(y_test == positive)),
        val_macro_f1_mean=float(np.mean(val_scores)),
        val_macro_f1_std=float(np.std(val_scores)),
        test_macro_f1_mean=float(np.mean(test_scores)),
        test_macro_f1_std=float(np.std(test_scores)),
        val_macro_f1_per_split=[float(v) for v in val_scores],
        test_macro_f1_per_split=[float(v) for v in test_scores],
        recall_per_class={str(k): v for k, v in recalls.items()},
        confusion={str(k): v for k, v in confusion_sum.items()},
        pr_points=points,
        pr_auc=float(auc),
        n_rows=len(y),
        n_test=len(test_idx),
        class_counts=class_counts,
        seed=plan.seed,
    )
