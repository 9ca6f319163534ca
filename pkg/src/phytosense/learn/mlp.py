"""Multi-layer perceptron: ReLU hidden layers, softmax output, Adam updates.

The step size halves whenever the validation loss fails to improve for 10
consecutive epochs; training stops after three halvings or 500 epochs,
whichever comes first.
"""
from __future__ import annotations

import numpy as np

from .base import BinaryClassifier

_ADAM_B1 = 0.9
_ADAM_B2 = 0.999
_ADAM_EPS = 1e-8


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class MLP(BinaryClassifier):
    kind = "mlp"

    def __init__(self, hidden_layers: tuple[int, ...] = (50, 50, 25),
                 learning_rate: float = 1e-3, batch_size: int = 32,
                 max_epochs: int = 500, patience_epochs: int = 10,
                 max_halvings: int = 3, validation_fraction: float = 0.1,
                 seed: int = 0):
        self.hidden_layers = tuple(hidden_layers)
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience_epochs = patience_epochs
        self.max_halvings = max_halvings
        self.validation_fraction = validation_fraction
        self.seed = seed

    # ------------------------------------------------------------------
    def _init_params(self, d: int, rng: np.random.Generator) -> None:
        sizes = [d, *self.hidden_layers, 2]
        self.weights_ = []
        self.biases_ = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            scale = np.sqrt(2.0 / fan_in)  # He init for ReLU
            self.weights_.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
            self.biases_.append(np.zeros(fan_out))

    def _forward(self, X: np.ndarray) -> list[np.ndarray]:
        activations = [X]
        a = X
        last = len(self.weights_) - 1
        for i, (W, b) in enumerate(zip(self.weights_, self.biases_)):
            z = a @ W + b
            a = z if i == last else np.maximum(z, 0.0)
            activations.append(a)
        return activations

    def loss_and_gradients(self, X: np.ndarray, y01: np.ndarray):
        """Mean cross-entropy and gradients w.r.t. every weight and bias."""
        n = len(X)
        activations = self._forward(X)
        logits = activations[-1]
        probs = _softmax(logits)
        eps = 1e-12
        loss = float(-np.mean(np.log(probs[np.arange(n), y01] + eps)))
        target = np.zeros_like(probs)
        target[np.arange(n), y01] = 1.0
        delta = (probs - target) / n
        grads_w = [None] * len(self.weights_)
        grads_b = [None] * len(self.biases_)
        for i in range(len(self.weights_) - 1, -1, -1):
            grads_w[i] = activations[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights_[i].T) * (activations[i] > 0)
        return loss, grads_w, grads_b

    def _loss(self, X: np.ndarray, y01: np.ndarray) -> float:
        probs = _softmax(self._forward(X)[-1])
        return float(-np.mean(np.log(probs[np.arange(len(X)), y01] + 1e-12)))

    def _schedule_split(self, y01: np.ndarray, rng: np.random.Generator):
        """Stratified hold-out feeding the adaptive learning-rate schedule."""
        val_idx: list[int] = []
        for c in (0, 1):
            rows = np.flatnonzero(y01 == c)
            n_val = int(round(self.validation_fraction * len(rows)))
            n_val = min(max(n_val, 1), len(rows) - 1)
            picked = rng.permutation(len(rows))[:n_val]
            val_idx.extend(rows[picked].tolist())
        val = np.array(sorted(val_idx), dtype=int)
        train = np.setdiff1d(np.arange(len(y01)), val)
        return train, val

    # ------------------------------------------------------------------
    def fit(self, X, y, positive_label=None) -> "MLP":
        y01 = self._encode_fit(X, y, positive_label)
        X = np.asarray(X, dtype=float)
        rng = np.random.default_rng(self.seed)
        self._init_params(X.shape[1], rng)

        counts = np.bincount(y01, minlength=2)
        use_validation = counts.min() >= 2 and len(X) >= 8
        if use_validation:
            train_idx, val_idx = self._schedule_split(y01, rng)
        else:
            train_idx = np.arange(len(X))
            val_idx = train_idx

        m_w = [np.zeros_like(w) for w in self.weights_]
        v_w = [np.zeros_like(w) for w in self.weights_]
        m_b = [np.zeros_like(b) for b in self.biases_]
        v_b = [np.zeros_like(b) for b in self.biases_]
        t = 0
        lr = self.learning_rate
        best_loss = np.inf
        stall = 0
        halvings = 0

        X_tr, y_tr = X[train_idx], y01[train_idx]
        X_val, y_val = X[val_idx], y01[val_idx]
        for _ in range(self.max_epochs):
            order = rng.permutation(len(X_tr))
            for start in range(0, len(order), self.batch_size):
                batch = order[start:start + self.batch_size]
                _, grads_w, grads_b = self.loss_and_gradients(X_tr[batch], y_tr[batch])
                t += 1
                correction = np.sqrt(1.0 - _ADAM_B2 ** t) / (1.0 - _ADAM_B1 ** t)
                for i in range(len(self.weights_)):
                    m_w[i] = _ADAM_B1 * m_w[i] + (1 - _ADAM_B1) * grads_w[i]
                    v_w[i] = _ADAM_B2 * v_w[i] + (1 - _ADAM_B2) * grads_w[i] ** 2
                    self.weights_[i] -= lr * correction * m_w[i] / (np.sqrt(v_w[i]) + _ADAM_EPS)
                    m_b[i] = _ADAM_B1 * m_b[i] + (1 - _ADAM_B1) * grads_b[i]
                    v_b[i] = _ADAM_B2 * v_b[i] + (1 - _ADAM_B2) * grads_b[i] ** 2
                    self.biases_[i] -= lr * correction * m_b[i] / (np.sqrt(v_b[i]) + _ADAM_EPS)
            val_loss = self._loss(X_val, y_val)
            if val_loss < best_loss - 1e-12:
                best_loss = val_loss
                stall = 0
            else:
                stall += 1
            if stall >= self.patience_epochs:
                if halvings >= self.max_halvings:
                    break
                lr /= 2.0
                halvings += 1
                stall = 0
        return self

    def predict_score(self, X) -> np.ndarray:
        X = self._check_predict(X)
        return _softmax(self._forward(X)[-1])[:, 1]

    def state_dict(self) -> dict:
        return {**self._base_state(),
                "hidden_layers": list(self.hidden_layers),
                "learning_rate": self.learning_rate,
                "batch_size": self.batch_size,
                "max_epochs": self.max_epochs,
                "patience_epochs": self.patience_epochs,
                "max_halvings": self.max_halvings,
                "validation_fraction": self.validation_fraction,
                "seed": self.seed,
                "weights": [w.tolist() for w in self.weights_],
                "biases": [b.tolist() for b in self.biases_]}

    def load_state(self, state: dict) -> "MLP":
        self._load_base(state)
        self.hidden_layers = tuple(state["hidden_layers"])
        self.learning_rate = state["learning_rate"]
        self.batch_size = state["batch_size"]
        self.max_epochs = state["max_epochs"]
        self.patience_epochs = state["patience_epochs"]
        self.max_halvings = state["max_halvings"]
        self.validation_fraction = state["validation_fraction"]
        self.seed = state["seed"]
        self.weights_ = [np.array(w) for w in state["weights"]]
        self.biases_ = [np.array(b) for b in state["biases"]]
        return self
