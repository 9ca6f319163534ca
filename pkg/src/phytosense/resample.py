"""SMOTE up-sampling of the minority class to parity with the majority.

Each synthetic row is x + u * (n - x) for a minority row x, one of its k
nearest minority neighbours n (Euclidean distance) and u uniform in [0, 1).
Original rows are preserved verbatim; synthetics are appended in
(base index, draw index) order, so output is bit-identical for a fixed seed.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import TooFewMinoritySamples
from .features import FeatureMatrix


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    rng_seed: int = 0


def smote_arrays(X: np.ndarray, y: np.ndarray,
                 cfg: SmoteConfig) -> tuple[np.ndarray, np.ndarray, int]:
    """Core SMOTE on arrays; returns (X_out, y_out, n_synthetic)."""
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise ValueError(f"SMOTE needs exactly two classes, got {len(classes)}")
    minority = classes[np.argmin(counts)]
    n_min, n_maj = counts.min(), counts.max()
    if n_min == n_maj:
        return X, y, 0  # already balanced
    if n_min < 2:
        raise TooFewMinoritySamples(f"minority class has {n_min} sample(s)")

    k = cfg.k_neighbors
    if k >= n_min:
        k = int(n_min) - 1
        warnings.warn(f"k_neighbors reduced to {k} (minority size {n_min})",
                      stacklevel=2)
    if k < 1:
        raise ValueError("k_neighbors must be >= 1")

    min_idx = np.flatnonzero(y == minority)
    Xm = X[min_idx]
    # pairwise distances among minority rows; self excluded via +inf
    sq = np.sum(Xm ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (Xm @ Xm.T)
    np.fill_diagonal(d2, np.inf)
    neighbor_idx = np.argsort(d2, axis=1, kind="stable")[:, :k]

    need = int(n_maj - n_min)
    per_base = np.full(len(min_idx), need // len(min_idx))
    per_base[: need % len(min_idx)] += 1

    rng = np.random.default_rng(cfg.rng_seed)
    synthetic = np.empty((need, X.shape[1]))
    pos = 0
    for base in range(len(min_idx)):
        for _ in range(per_base[base]):
            neighbor = neighbor_idx[base, rng.integers(k)]
            u = rng.random()
            synthetic[pos] = Xm[base] + u * (Xm[neighbor] - Xm[base])
            pos += 1
    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(need, minority, dtype=y.dtype)])
    return X_out, y_out, need


def smote(train: FeatureMatrix, cfg: SmoteConfig) -> FeatureMatrix:
    """Balance a training FeatureMatrix; synthetics inherit base provenance."""
    X_out, y_out, n_syn = smote_arrays(train.features, train.labels, cfg)
    if n_syn == 0:
        return train
    classes, counts = np.unique(train.labels, return_counts=True)
    minority = classes[np.argmin(counts)]
    min_rows = np.flatnonzero(train.labels == minority)
    per_base = np.full(len(min_rows), n_syn // len(min_rows))
    per_base[: n_syn % len(min_rows)] += 1
    provenance = list(train.provenance)
    for base, reps in zip(min_rows, per_base):
        provenance.extend([train.provenance[base]] * reps)
    return replace(train, features=X_out, labels=y_out, provenance=provenance,
                   imputed=None)
