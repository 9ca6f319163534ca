"""Decision trees on Gini impurity, bagged forests, and extra-trees.

Split ties are broken toward the lowest feature index, then the lowest
threshold.  Forests bag with replacement and sample floor(sqrt(d)) features
per split; extra-trees draw one uniform threshold per candidate feature and
skip the bootstrap.  Per-tree seeds derive from the root seed by counter.
"""
from __future__ import annotations

import numpy as np

from .base import BinaryClassifier, derive_seed

_MIN_GAIN = 1e-12


def _gini(pos: float, n: float) -> float:
    p = pos / n
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def _best_exhaustive_split(X, y01, rows, features, min_leaf):
    """Best (feature, threshold, weighted_gini) over midpoint candidates."""
    n = len(rows)
    best = None
    for f in features:
        x = X[rows, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y01[rows][order]
        cum_pos = np.cumsum(ys)
        total_pos = cum_pos[-1]
        i = np.arange(n - 1)
        valid = (xs[:-1] < xs[1:]) & (i + 1 >= min_leaf) & (n - i - 1 >= min_leaf)
        if not valid.any():
            continue
        left_n = (i + 1)[valid].astype(float)
        right_n = n - left_n
        left_pos = cum_pos[:-1][valid].astype(float)
        right_pos = total_pos - left_pos
        pl = left_pos / left_n
        pr = right_pos / right_n
        weighted = (left_n * (1.0 - pl * pl - (1.0 - pl) ** 2)
                    + right_n * (1.0 - pr * pr - (1.0 - pr) ** 2)) / n
        j = int(np.argmin(weighted))  # first minimum: lowest threshold wins
        score = float(weighted[j])
        if best is None or score < best[2] - _MIN_GAIN:
            pos = np.flatnonzero(valid)[j]
            threshold = (xs[pos] + xs[pos + 1]) / 2.0
            best = (int(f), float(threshold), score)
    return best


def _best_random_split(X, y01, rows, features, min_leaf, rng):
    """One uniform threshold per candidate feature (extra-trees style)."""
    n = len(rows)
    best = None
    for f in features:
        x = X[rows, f]
        lo, hi = float(x.min()), float(x.max())
        if lo == hi:
            continue
        threshold = float(rng.uniform(lo, hi))
        left = x <= threshold
        left_n = int(left.sum())
        if left_n < min_leaf or n - left_n < min_leaf:
            continue
        ys = y01[rows]
        left_pos = int(ys[left].sum())
        right_pos = int(ys.sum()) - left_pos
        weighted = (left_n * _gini(left_pos, left_n)
                    + (n - left_n) * _gini(right_pos, n - left_n)) / n
        if best is None or weighted < best[2] - _MIN_GAIN:
            best = (int(f), threshold, weighted)
    return best


def _build_tree(X, y01, rows, *, max_depth, min_leaf, n_feature_sample,
                random_thresholds, rng) -> dict:
    d = X.shape[1]
    root: dict = {}
    stack = [(rows, 0, root)]
    while stack:
        node_rows, depth, node = stack.pop()
        n = len(node_rows)
        pos = int(y01[node_rows].sum())
        if (pos == 0 or pos == n or n < 2 * min_leaf
                or (max_depth is not None and depth >= max_depth)):
            node.update(pos=pos, n=n)
            continue
        if n_feature_sample is not None and n_feature_sample < d:
            features = np.sort(rng.choice(d, n_feature_sample, replace=False))
        else:
            features = np.arange(d)
        if random_thresholds:
            split = _best_random_split(X, y01, node_rows, features, min_leaf, rng)
        else:
            split = _best_exhaustive_split(X, y01, node_rows, features, min_leaf)
        if split is None or _gini(pos, n) - split[2] <= _MIN_GAIN:
            node.update(pos=pos, n=n)
            continue
        feature, threshold, _ = split
        mask = X[node_rows, feature] <= threshold
        left_node: dict = {}
        right_node: dict = {}
        node.update(feature=feature, threshold=threshold,
                    left=left_node, right=right_node)
        stack.append((node_rows[mask], depth + 1, left_node))
        stack.append((node_rows[~mask], depth + 1, right_node))
    return root


def _tree_pos_fraction(tree: dict, X: np.ndarray) -> np.ndarray:
    """Leaf positive fraction for every row, by iterative mask routing."""
    out = np.empty(len(X))
    stack = [(tree, np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        if len(idx) == 0:
            continue
        if "feature" not in node:
            out[idx] = node["pos"] / node["n"]
            continue
        mask = X[idx, node["feature"]] <= node["threshold"]
        stack.append((node["left"], idx[mask]))
        stack.append((node["right"], idx[~mask]))
    return out


class DecisionTree(BinaryClassifier):
    """Single Gini tree over all features with exhaustive midpoint thresholds."""

    kind = "decision_tree"

    def __init__(self, max_depth: int | None = None, min_leaf: int = 1, seed: int = 0):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed  # unused: the single tree is fully deterministic

    def fit(self, X, y, positive_label=None) -> "DecisionTree":
        y01 = self._encode_fit(X, y, positive_label)
        X = np.asarray(X, dtype=float)
        self.tree_ = _build_tree(X, y01, np.arange(len(X)), max_depth=self.max_depth,
                                 min_leaf=self.min_leaf, n_feature_sample=None,
                                 random_thresholds=False, rng=None)
        return self

    def predict_score(self, X) -> np.ndarray:
        X = self._check_predict(X)
        return _tree_pos_fraction(self.tree_, X)

    def state_dict(self) -> dict:
        return {**self._base_state(), "max_depth": self.max_depth,
                "min_leaf": self.min_leaf, "seed": self.seed, "tree": self.tree_}

    def load_state(self, state: dict) -> "DecisionTree":
        self._load_base(state)
        self.max_depth = state["max_depth"]
        self.min_leaf = state["min_leaf"]
        self.seed = state["seed"]
        self.tree_ = state["tree"]
        return self


class _TreeEnsemble(BinaryClassifier):
    bootstrap = True
    random_thresholds = False

    def __init__(self, n_trees: int = 256, max_depth: int | None = None,
                 min_leaf: int = 1, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y, positive_label=None):
        y01 = self._encode_fit(X, y, positive_label)
        X = np.asarray(X, dtype=float)
        n, d = X.shape
        m = max(1, int(np.sqrt(d)))
        self.trees_ = []
        for i in range(self.n_trees):
            rng = np.random.default_rng(derive_seed(self.seed, i))
            rows = rng.integers(0, n, n) if self.bootstrap else np.arange(n)
            self.trees_.append(_build_tree(
                X, y01, rows, max_depth=self.max_depth, min_leaf=self.min_leaf,
                n_feature_sample=m, random_thresholds=self.random_thresholds,
                rng=rng))
        return self

    def predict_score(self, X) -> np.ndarray:
        """Fraction of trees voting for the positive class."""
        X = self._check_predict(X)
        votes = np.zeros(len(X))
        for tree in self.trees_:
            votes += _tree_pos_fraction(tree, X) > 0.5
        return votes / len(self.trees_)

    def state_dict(self) -> dict:
        return {**self._base_state(), "n_trees": self.n_trees,
                "max_depth": self.max_depth, "min_leaf": self.min_leaf,
                "seed": self.seed, "trees": self.trees_}

    def load_state(self, state: dict):
        self._load_base(state)
        self.n_trees = state["n_trees"]
        self.max_depth = state["max_depth"]
        self.min_leaf = state["min_leaf"]
        self.seed = state["seed"]
        self.trees_ = state["trees"]
        return self


class RandomForest(_TreeEnsemble):
    kind = "random_forest"
    bootstrap = True
    random_thresholds = False


class ExtraTrees(_TreeEnsemble):
    kind = "extra_trees"
    bootstrap = False
    random_thresholds = True
