"""Gaussian naive Bayes and quadratic discriminant analysis."""
from __future__ import annotations

import numpy as np

from ..errors import SingularCovariance
from .base import BinaryClassifier, softmax_pair


class GaussianNB(BinaryClassifier):
    """Per-class feature means/variances with Bayes' rule on Gaussian likelihoods.

    Population variances are floored at ``var_floor`` to keep log-densities
    finite on constant features.
    """

    kind = "gaussian_nb"

    def __init__(self, var_floor: float = 1e-9):
        self.var_floor = var_floor

    def fit(self, X, y, positive_label=None) -> "GaussianNB":
        y01 = self._encode_fit(X, y, positive_label)
        X = np.asarray(X, dtype=float)
        self.means_ = np.empty((2, X.shape[1]))
        self.vars_ = np.empty((2, X.shape[1]))
        self.log_priors_ = np.empty(2)
        for c in (0, 1):
            rows = X[y01 == c]
            self.means_[c] = rows.mean(axis=0)
            self.vars_[c] = np.maximum(rows.var(axis=0), self.var_floor)
            self.log_priors_[c] = np.log(len(rows) / len(X))
        return self

    def _log_joint(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((len(X), 2))
        for c in (0, 1):
            z = (X - self.means_[c]) ** 2 / self.vars_[c]
            out[:, c] = self.log_priors_[c] - 0.5 * np.sum(
                z + np.log(2.0 * np.pi * self.vars_[c]), axis=1)
        return out

    def predict_score(self, X) -> np.ndarray:
        X = self._check_predict(X)
        lj = self._log_joint(X)
        return softmax_pair(lj[:, 0], lj[:, 1])

    def state_dict(self) -> dict:
        return {**self._base_state(), "var_floor": self.var_floor,
                "means": self.means_.tolist(), "vars": self.vars_.tolist(),
                "log_priors": self.log_priors_.tolist()}

    def load_state(self, state: dict) -> "GaussianNB":
        self._load_base(state)
        self.var_floor = state["var_floor"]
        self.means_ = np.array(state["means"])
        self.vars_ = np.array(state["vars"])
        self.log_priors_ = np.array(state["log_priors"])
        return self


class QDA(BinaryClassifier):
    """Per-class mean and full covariance, ridge-regularized.

    The ridge is ``ridge_scale * trace(cov) / d`` added to the diagonal; a
    covariance that stays non-positive-definite raises SingularCovariance.
    """

    kind = "qda"

    def __init__(self, ridge_scale: float = 1e-6):
        self.ridge_scale = ridge_scale

    def fit(self, X, y, positive_label=None) -> "QDA":
        y01 = self._encode_fit(X, y, positive_label)
        X = np.asarray(X, dtype=float)
        d = X.shape[1]
        self.means_ = np.empty((2, d))
        self.chol_ = []
        self.log_dets_ = np.empty(2)
        self.log_priors_ = np.empty(2)
        for c in (0, 1):
            rows = X[y01 == c]
            mu = rows.mean(axis=0)
            centered = rows - mu
            cov = centered.T @ centered / len(rows)
            ridge = self.ridge_scale * np.trace(cov) / d
            cov = cov + ridge * np.eye(d)
            try:
                chol = np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise SingularCovariance(
                    f"class {self.classes_[c]!r} covariance not PD after ridge") from None
            self.means_[c] = mu
            self.chol_.append(chol)
            self.log_dets_[c] = 2.0 * np.sum(np.log(np.diag(chol)))
            self.log_priors_[c] = np.log(len(rows) / len(X))
        return self

    def _log_joint(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((len(X), 2))
        for c in (0, 1):
            diff = (X - self.means_[c]).T
            z = np.linalg.solve(self.chol_[c], diff)  # mahalanobis via factor
            maha = np.sum(z ** 2, axis=0)
            out[:, c] = self.log_priors_[c] - 0.5 * (self.log_dets_[c] + maha)
        return out

    def predict_score(self, X) -> np.ndarray:
        X = self._check_predict(X)
        lj = self._log_joint(X)
        return softmax_pair(lj[:, 0], lj[:, 1])

    def state_dict(self) -> dict:
        return {**self._base_state(), "ridge_scale": self.ridge_scale,
                "means": self.means_.tolist(),
                "chol": [c.tolist() for c in self.chol_],
                "log_dets": self.log_dets_.tolist(),
                "log_priors": self.log_priors_.tolist()}

    def load_state(self, state: dict) -> "QDA":
        self._load_base(state)
        self.ridge_scale = state["ridge_scale"]
        self.means_ = np.array(state["means"])
        self.chol_ = [np.array(c) for c in state["chol"]]
        self.log_dets_ = np.array(state["log_dets"])
        self.log_priors_ = np.array(state["log_priors"])
        return self
