"""Feature-space transforms composable in front of a classifier."""
from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from ..features import MinMaxParams, apply_minmax, fit_minmax


class Normalizer:
    """Scale every row to unit L2 norm; zero rows stay zero.  Stateless."""

    kind = "normalizer"

    def fit(self, X: np.ndarray) -> "Normalizer":
        self.n_features_ = X.shape[1]
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        return X / norms

    def state_dict(self) -> dict:
        return {"n_features": int(self.n_features_)}

    def load_state(self, state: dict) -> "Normalizer":
        self.n_features_ = state["n_features"]
        return self


class Standardizer:
    """Per-column zero mean / unit std on the fit data (population std)."""

    kind = "standardizer"

    def fit(self, X: np.ndarray) -> "Standardizer":
        self.mean_ = np.mean(X, axis=0)
        std = np.std(X, axis=0)
        std[std == 0] = 1.0  # constant columns map to 0 after centering
        self.std_ = std
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean_) / self.std_

    def state_dict(self) -> dict:
        return {"mean": self.mean_.tolist(), "std": self.std_.tolist()}

    def load_state(self, state: dict) -> "Standardizer":
        self.mean_ = np.array(state["mean"])
        self.std_ = np.array(state["std"])
        return self


class MinMaxTransform:
    """Per-column rescaling to [0, 1] on the fit rows (no clipping later)."""

    kind = "minmax"

    def fit(self, X: np.ndarray) -> "MinMaxTransform":
        self.params_ = fit_minmax(X)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return apply_minmax(self.params_, X)

    def state_dict(self) -> dict:
        return {"minimum": self.params_.minimum.tolist(),
                "maximum": self.params_.maximum.tolist()}

    def load_state(self, state: dict) -> "MinMaxTransform":
        self.params_ = MinMaxParams(minimum=np.array(state["minimum"]),
                                    maximum=np.array(state["maximum"]))
        return self


class VarianceThreshold:
    """Drop columns whose population variance is <= tau."""

    kind = "variance_threshold"

    def __init__(self, tau: float = 0.0):
        self.tau = tau

    def fit(self, X: np.ndarray) -> "VarianceThreshold":
        variances = np.var(X, axis=0)
        self.retained_ = np.flatnonzero(variances > self.tau)
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return X[:, self.retained_]

    def state_dict(self) -> dict:
        return {"tau": self.tau, "retained": self.retained_.tolist()}

    def load_state(self, state: dict) -> "VarianceThreshold":
        self.tau = state["tau"]
        self.retained_ = np.array(state["retained"], dtype=int)
        return self


class PCA:
    """Projection onto the leading eigenvectors of the covariance matrix.

    Either a fixed component count or the smallest count reaching the
    explained-variance target (default 0.95) is kept.  Component signs are
    fixed so the largest-magnitude entry is positive.
    """

    kind = "pca"

    def __init__(self, n_components: int | None = None, variance_target: float = 0.95):
        self.n_components = n_components
        self.variance_target = variance_target

    def fit(self, X: np.ndarray) -> "PCA":
        self.mean_ = np.mean(X, axis=0)
        centered = X - self.mean_
        cov = centered.T @ centered / max(1, len(X) - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals = np.clip(eigvals[order], 0.0, None)
        eigvecs = eigvecs[:, order]
        for j in range(eigvecs.shape[1]):
            pivot = np.argmax(np.abs(eigvecs[:, j]))
            if eigvecs[pivot, j] < 0:
                eigvecs[:, j] = -eigvecs[:, j]
        total = float(eigvals.sum())
        ratios = eigvals / total if total > 0 else np.zeros_like(eigvals)
        if self.n_components is not None:
            keep = min(self.n_components, len(eigvals))
        elif total == 0.0:
            keep = 1
        else:
            keep = int(np.searchsorted(np.cumsum(ratios), self.variance_target) + 1)
            keep = min(keep, len(eigvals))
        self.components_ = eigvecs[:, :keep]  # (d, keep), orthonormal columns
        self.explained_variance_ = eigvals[:keep]
        self.explained_variance_ratio_ = ratios[:keep]
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean_) @ self.components_

    def inverse_transform(self, Z: np.ndarray) -> np.ndarray:
        return Z @ self.components_.T + self.mean_

    def state_dict(self) -> dict:
        return {
            "n_components": self.n_components,
            "variance_target": self.variance_target,
            "mean": self.mean_.tolist(),
            "components": self.components_.tolist(),
            "explained_variance": self.explained_variance_.tolist(),
            "explained_variance_ratio": self.explained_variance_ratio_.tolist(),
        }

    def load_state(self, state: dict) -> "PCA":
        self.n_components = state["n_components"]
        self.variance_target = state["variance_target"]
        self.mean_ = np.array(state["mean"])
        self.components_ = np.array(state["components"])
        self.explained_variance_ = np.array(state["explained_variance"])
        self.explained_variance_ratio_ = np.array(state["explained_variance_ratio"])
        return self


TRANSFORM_KINDS = {
    "normalizer": Normalizer,
    "standardizer": Standardizer,
    "minmax": MinMaxTransform,
    "variance_threshold": VarianceThreshold,
    "pca": PCA,
}


def check_columns(X: np.ndarray, expected: int) -> None:
    if X.shape[1] != expected:
        raise DimensionMismatch(f"expected {expected} columns, got {X.shape[1]}")
