"""Mutual-information feature scoring and nested top-k selection sweeps.

MI uses the plug-in estimator over equal-frequency bins (default 16, natural
log): duplicate quantile edges collapse, and a value equal to a cut edge
falls in the lower bin.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import learn
from .evaluation import SplitPlan, holdout_split, macro_f1, minority_label, \
    stratified_shuffle_splits
from .features import apply_minmax, fit_minmax
from .learn.base import derive_seed
from .resample import SmoteConfig, smote_arrays


@dataclass(frozen=True)
class FeatureScore:
    feature_name: str
    mi_nats: float
    rank: int  # 0-based, by descending MI, ties by feature index


def _bin_indices(x: np.ndarray, bins: int) -> np.ndarray:
    quantiles = np.quantile(x, np.arange(1, bins) / bins)
    edges = np.unique(quantiles)
    return np.searchsorted(edges, x, side="left")


def _mi_nats(x_bins: np.ndarray, y01: np.ndarray) -> float:
    n = len(y01)
    mi = 0.0
    for b in np.unique(x_bins):
        in_bin = x_bins == b
        p_b = in_bin.sum() / n
        for c in (0, 1):
            joint = np.sum(in_bin & (y01 == c)) / n
            if joint > 0:
                p_c = np.sum(y01 == c) / n
                mi += joint * np.log(joint / (p_b * p_c))
    return max(mi, 0.0)  # plug-in MI is non-negative; clamp round-off


def _mi_per_column(X: np.ndarray, y: np.ndarray, bins: int) -> np.ndarray:
    y = np.asarray(y)
    classes = np.unique(y)
    if len(classes) != 2:
        raise ValueError(f"need 2 classes, got {len(classes)}")
    y01 = (y == classes[1]).astype(int)
    return np.array([_mi_nats(_bin_indices(X[:, j], bins), y01)
                     for j in range(X.shape[1])])


def ranked_indices(X: np.ndarray, y: np.ndarray, bins: int = 16) -> list[int]:
    """Column indices by descending MI (stable tie-break by index)."""
    mis = _mi_per_column(np.asarray(X, dtype=float), y, bins)
    return sorted(range(X.shape[1]), key=lambda j: (-mis[j], j))


def mutual_information(X: np.ndarray, y: np.ndarray,
                       bins: int = 16,
                       feature_names: list[str] | None = None) -> list[FeatureScore]:
    """Per-feature MI with the class label, sorted descending."""
    X = np.asarray(X, dtype=float)
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(X.shape[1])]
    mis = _mi_per_column(X, y, bins)
    order = sorted(range(X.shape[1]), key=lambda j: (-mis[j], j))
    return [FeatureScore(feature_name=feature_names[j], mi_nats=float(mis[j]),
                         rank=rank)
            for rank, j in enumerate(order)]


@dataclass
class SelectionSweep:
    ks: list[int]
    mean_macro_f1: list[float]
    std_macro_f1: list[float]
    features_added: list[str]  # per k, from the whole-training-pool ranking
    selected_names: list[list[str]]  # nested top-k sets
    mode: str


def sweep_top_k(X: np.ndarray, y: np.ndarray,
                classifier_spec: learn.ClassifierSpec,
                K: int = 50, bins: int = 16, mode: str = "per_split",
                plan: SplitPlan | None = None,
                smote_cfg: SmoteConfig | None = None,
                feature_names: list[str] | None = None) -> SelectionSweep:
    """Macro F1 (mean +/- std over ten shuffle splits) for k = 1..K columns.

    ``per_split`` re-ranks features on each split's training fold so the
    reported scores are leak-free; ``global`` ranks once on the whole
    training pool.  Reported feature names always come from the pool ranking;
    selected columns are materialized in original column order, so the k = K
    endpoint equals the all-features evaluation for the same plan.
    """
    plan = plan or SplitPlan()
    if mode not in ("per_split", "global"):
        raise ValueError(f"unknown mode {mode!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if K > X.shape[1]:
        raise ValueError(f"K={K} exceeds column count {X.shape[1]}")
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(X.shape[1])]
    positive = minority_label(y)
    classes = sorted(np.unique(y).tolist())

    pool_idx, _ = holdout_split(y, plan.test_fraction, plan.seed)
    X_pool, y_pool = X[pool_idx], y[pool_idx]
    pool_ranking = ranked_indices(X_pool, y_pool, bins)
    splits = stratified_shuffle_splits(y_pool, plan)

    # per-split fold data and rankings computed once, reused for every k
    fold_data = []
    for i, (train, val) in enumerate(splits):
        X_train, y_train = X_pool[train], y_pool[train]
        X_val, y_val = X_pool[val], y_pool[val]
        ranking = ranked_indices(X_train, y_train, bins) \
            if mode == "per_split" else pool_ranking
        fold_data.append((X_train, y_train, X_val, y_val, ranking, i))

    ks, means, stds, added, selected = [], [], [], [], []
    for k in range(1, K + 1):
        fold_scores = []
        for X_train, y_train, X_val, y_val, ranking, i in fold_data:
            cols = sorted(ranking[:k])
            Xt, Xv = X_train[:, cols], X_val[:, cols]
            params = fit_minmax(Xt)
            Xt = apply_minmax(params, Xt)
            Xv = apply_minmax(params, Xv)
            yt = y_train
            if smote_cfg is not None:
                cfg = SmoteConfig(k_neighbors=smote_cfg.k_neighbors,
                                  rng_seed=derive_seed(smote_cfg.rng_seed, plan.seed, i))
                Xt, yt, _ = smote_arrays(Xt, yt, cfg)
            spec = classifier_spec.with_seed(
                derive_seed(classifier_spec.seed, plan.seed, i))
            model = learn.fit(spec, [], Xt, yt, positive_label=positive)
            fold_scores.append(macro_f1(y_val, model.predict(Xv), classes))
        ks.append(k)
        means.append(float(np.mean(fold_scores)))
        stds.append(float(np.std(fold_scores)))
        top_k_names = [feature_names[j] for j in sorted(pool_ranking[:k])]
        selected.append(top_k_names)
        added.append(feature_names[pool_ranking[k - 1]])
    return SelectionSweep(ks=ks, mean_macro_f1=means, std_macro_f1=stds,
                          features_added=added, selected_names=selected, mode=mode)


def write_mi_csv(scores: list[FeatureScore], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "feature", "mi_nats"])
        for s in scores:
            writer.writerow([s.rank, s.feature_name, repr(s.mi_nats)])


def write_sweep_csv(sweep: SelectionSweep, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "mean_macro_f1", "std_macro_f1", "features_added"])
        for k, mean, std, name in zip(sweep.ks, sweep.mean_macro_f1,
                                      sweep.std_macro_f1, sweep.features_added):
            writer.writerow([k, repr(mean), repr(std), name])
