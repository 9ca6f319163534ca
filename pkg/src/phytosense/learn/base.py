"""Shared plumbing for the binary classifiers."""
from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, NonFiniteInput, SingleClassInput


class BinaryClassifier:
    """Base class: label encoding, input checks, shared predict logic.

    ``predict_score`` returns the score of the positive class, which defaults
    to the training minority (ties broken toward the later class in sorted
    order).  ``predict`` thresholds that score at 0.5 unless a subclass
    overrides the decision rule.
    """

    kind = "base"

    def _encode_fit(self, X: np.ndarray, y: np.ndarray,
                    positive_label=None) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] < 1:
            raise DimensionMismatch("X must be 2-D with at least one column")
        if not np.isfinite(X).all():
            raise NonFiniteInput("X contains NaN or infinity")
        classes, counts = np.unique(np.asarray(y), return_counts=True)
        if len(classes) != 2:
            raise SingleClassInput(f"need exactly 2 classes, got {len(classes)}")
        if counts.min() < 2:
            raise SingleClassInput("need at least 2 rows per class")
        if positive_label is not None:
            if positive_label not in classes:
                raise ValueError(f"positive label {positive_label!r} not in data")
            positive = positive_label
        elif counts[0] == counts[1]:
            positive = classes[1]
        else:
            positive = classes[np.argmin(counts)]
        negative = classes[0] if positive == classes[1] else classes[1]
        self.classes_ = [negative, positive]
        self.n_features_ = X.shape[1]
        return (np.asarray(y) == positive).astype(int)

    def _check_predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise DimensionMismatch(
                f"expected {self.n_features_} columns, got {X.shape[1] if X.ndim == 2 else 'non-2D'}")
        return X

    def _decode(self, y01: np.ndarray) -> np.ndarray:
        out = np.empty(len(y01), dtype=object)
        out[y01 == 0] = self.classes_[0]
        out[y01 == 1] = self.classes_[1]
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        scores = self.predict_score(X)
        return self._decode((scores > 0.5).astype(int))

    # persistence helpers -------------------------------------------------
    def _base_state(self) -> dict:
        return {"classes": [str(c) for c in self.classes_],
                "n_features": int(self.n_features_)}

    def _load_base(self, state: dict) -> None:
        self.classes_ = list(state["classes"])
        self.n_features_ = state["n_features"]


def softmax_pair(log_a: np.ndarray, log_b: np.ndarray) -> np.ndarray:
    """P(b) from two log-joint columns, computed stably."""
    top = np.maximum(log_a, log_b)
    ea = np.exp(log_a - top)
    eb = np.exp(log_b - top)
    return eb / (ea + eb)


def derive_seed(*parts: int) -> int:
    """Deterministic child seed from hierarchical integer parts."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])
