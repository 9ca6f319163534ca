"""k-nearest-neighbour classifier (Euclidean, odd k, stored training set)."""
from __future__ import annotations

import numpy as np

from .base import BinaryClassifier


class KNN(BinaryClassifier):
    """Majority vote among the k nearest training rows.

    k is forced odd (an even k is incremented) so binary votes cannot tie;
    equal distances are broken by the lower training-row index.
    """

    kind = "knn"

    def __init__(self, k: int = 5):
        self.k = k if k % 2 == 1 else k + 1

    def fit(self, X, y, positive_label=None) -> "KNN":
        y01 = self._encode_fit(X, y, positive_label)
        self.X_ = np.asarray(X, dtype=float).copy()
        self.y01_ = y01
        self.k_effective_ = min(self.k, len(self.X_))
        if self.k_effective_ % 2 == 0:
            self.k_effective_ -= 1
        return self

    def predict_score(self, X) -> np.ndarray:
        X = self._check_predict(X)
        sq_train = np.sum(self.X_ ** 2, axis=1)
        sq_test = np.sum(X ** 2, axis=1)
        d2 = sq_test[:, None] + sq_train[None, :] - 2.0 * (X @ self.X_.T)
        order = np.argsort(d2, axis=1, kind="stable")[:, :self.k_effective_]
        votes = self.y01_[order]
        return votes.mean(axis=1)

    def state_dict(self) -> dict:
        return {**self._base_state(), "k": self.k,
                "k_effective": int(self.k_effective_),
                "X": self.X_.tolist(), "y01": self.y01_.tolist()}

    def load_state(self, state: dict) -> "KNN":
        self._load_base(state)
        self.k = state["k"]
        self.k_effective_ = state["k_effective"]
        self.X_ = np.array(state["X"])
        self.y01_ = np.array(state["y01"], dtype=int)
        return self
