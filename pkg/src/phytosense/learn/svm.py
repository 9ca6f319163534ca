"""Linear SVM trained by deterministic epoch-based sub-gradient descent."""
from __future__ import annotations

import numpy as np

from .base import BinaryClassifier


def _fit_logistic_link(margins: np.ndarray, y01: np.ndarray,
                       iterations: int = 50) -> tuple[float, float]:
    """Newton fit of sigma(a*m + b) on training margins (Platt-style link)."""
    a, b = 1.0, 0.0
    t = y01.astype(float)
    for _ in range(iterations):
        z = a * margins + b
        p = 1.0 / (1.0 + np.exp(-z))
        w = np.maximum(p * (1.0 - p), 1e-12)
        grad_a = float(np.sum((p - t) * margins)) + 1e-6 * a
        grad_b = float(np.sum(p - t))
        h_aa = float(np.sum(w * margins * margins)) + 1e-6
        h_ab = float(np.sum(w * margins))
        h_bb = float(np.sum(w)) + 1e-6
        det = h_aa * h_bb - h_ab * h_ab
        if abs(det) < 1e-18:
            break
        da = (grad_a * h_bb - grad_b * h_ab) / det
        db = (grad_b * h_aa - grad_a * h_ab) / det
        a, b = a - da, b - db
        if abs(da) < 1e-12 and abs(db) < 1e-12:
            break
    return a, b


class LinearSVM(BinaryClassifier):
    """Hinge loss + L2 penalty minimized over a fixed epoch budget.

    A single sample permutation is drawn from the seed and reused every
    epoch; the step size follows the 1/(lambda*t) schedule with
    lambda = 1/(C*n).  The bias is carried as an appended constant feature,
    so it shares the regularizer.  Scores map the signed margin through a
    logistic link fitted on the training margins.
    """

    kind = "linear_svm"

    def __init__(self, C: float = 1.0, epochs: int = 200, seed: int = 0):
        self.C = C
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y, positive_label=None) -> "LinearSVM":
        y01 = self._encode_fit(X, y, positive_label)
        X = np.asarray(X, dtype=float)
        n = len(X)
        Xb = np.hstack([X, np.ones((n, 1))])
        sign = 2.0 * y01 - 1.0
        lam = 1.0 / (self.C * n)
        rng = np.random.default_rng(self.seed)
        perm = rng.permutation(n)
        w = np.zeros(Xb.shape[1])
        t = 0
        for _ in range(self.epochs):
            for i in perm:
                t += 1
                eta = 1.0 / (lam * t)
                if sign[i] * float(Xb[i] @ w) < 1.0:
                    w = (1.0 - eta * lam) * w + eta * sign[i] * Xb[i]
                else:
                    w = (1.0 - eta * lam) * w
        self.weights_ = w
        margins = Xb @ w
        self.link_a_, self.link_b_ = _fit_logistic_link(margins, y01)
        return self

    def decision_function(self, X) -> np.ndarray:
        X = self._check_predict(X)
        return np.hstack([X, np.ones((len(X), 1))]) @ self.weights_

    def predict_score(self, X) -> np.ndarray:
        margins = self.decision_function(X)
        return 1.0 / (1.0 + np.exp(-(self.link_a_ * margins + self.link_b_)))

    def predict(self, X) -> np.ndarray:
        margins = self.decision_function(X)
        return self._decode((margins > 0).astype(int))

    def state_dict(self) -> dict:
        return {**self._base_state(), "C": self.C, "epochs": self.epochs,
                "seed": self.seed, "weights": self.weights_.tolist(),
                "link_a": self.link_a_, "link_b": self.link_b_}

    def load_state(self, state: dict) -> "LinearSVM":
        self._load_base(state)
        self.C = state["C"]
        self.epochs = state["epochs"]
        self.seed = state["seed"]
        self.weights_ = np.array(state["weights"])
        self.link_a_ = state["link_a"]
        self.link_b_ = state["link_b"]
        return self
