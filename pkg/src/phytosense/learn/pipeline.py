"""Declarative classifier/transform specs, fitted pipelines, persistence.

A pipeline is a short transform chain plus one classifier.  Fitted pipelines
serialize to a versioned JSON container whose load/save round-trip
reproduces predictions bit-exactly.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bayes import QDA, GaussianNB
from .mlp import MLP
from .neighbors import KNN
from .svm import LinearSVM
from .transforms import TRANSFORM_KINDS
from .trees import DecisionTree, ExtraTrees, RandomForest

CLASSIFIER_KINDS = {
    "gaussian_nb": GaussianNB,
    "qda": QDA,
    "knn": KNN,
    "linear_svm": LinearSVM,
    "decision_tree": DecisionTree,
    "random_forest": RandomForest,
    "extra_trees": ExtraTrees,
    "mlp": MLP,
}

_SEEDED_KINDS = {"linear_svm", "decision_tree", "random_forest", "extra_trees", "mlp"}

PIPELINE_FORMAT = "phytosense-pipeline"
PIPELINE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TransformSpec:
    kind: str  # key of TRANSFORM_KINDS
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str  # key of CLASSIFIER_KINDS
    params: dict = field(default_factory=dict)
    seed: int = 0

    def with_seed(self, seed: int) -> "ClassifierSpec":
        return ClassifierSpec(self.kind, dict(self.params), seed)


def build_transform(spec: TransformSpec):
    try:
        cls = TRANSFORM_KINDS[spec.kind]
    except KeyError:
        raise ValueError(f"unknown transform kind {spec.kind!r}") from None
    return cls(**spec.params)


def build_classifier(spec: ClassifierSpec):
    try:
        cls = CLASSIFIER_KINDS[spec.kind]
    except KeyError:
        raise ValueError(f"unknown classifier kind {spec.kind!r}") from None
    if spec.kind in _SEEDED_KINDS:
        return cls(**spec.params, seed=spec.seed)
    return cls(**spec.params)


def fit_transform(spec: TransformSpec, X: np.ndarray):
    """Fit one transform and return ``(fitted_transform, transformed_X)``."""
    transform = build_transform(spec).fit(X)
    return transform, transform.transform(X)


def apply_transform(transform, X: np.ndarray) -> np.ndarray:
    return transform.transform(X)


@dataclass
class TrainedPipeline:
    """Fitted transform chain + classifier; predict consumes raw feature rows."""

    transforms: list
    classifier: object
    classifier_spec: ClassifierSpec
    transform_specs: list[TransformSpec]
    fit_seconds: float = 0.0

    def _apply_chain(self, X: np.ndarray) -> np.ndarray:
        for transform in self.transforms:
            X = transform.transform(X)
        return X

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classifier.predict(self._apply_chain(np.asarray(X, dtype=float)))

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        return self.classifier.predict_score(self._apply_chain(np.asarray(X, dtype=float)))

    @property
    def classes_(self):
        return self.classifier.classes_

    # persistence ----------------------------------------------------------
    def save(self, path: str | Path) -> None:
        container = {
            "format": PIPELINE_FORMAT,
            "version": PIPELINE_FORMAT_VERSION,
            "classifier": {
                "kind": self.classifier_spec.kind,
                "params": self.classifier_spec.params,
                "seed": self.classifier_spec.seed,
                "state": self.classifier.state_dict(),
            },
            "transforms": [
                {"kind": spec.kind, "params": spec.params, "state": obj.state_dict()}
                for spec, obj in zip(self.transform_specs, self.transforms)
            ],
            "meta": {"fit_seconds": self.fit_seconds},
        }
        Path(path).write_text(json.dumps(container))

    @classmethod
    def load(cls, path: str | Path) -> "TrainedPipeline":
        container = json.loads(Path(path).read_text())
        if container.get("format") != PIPELINE_FORMAT:
            raise ValueError("not a pipeline container")
        if container.get("version") != PIPELINE_FORMAT_VERSION:
            raise ValueError(f"unsupported container version {container.get('version')}")
        transform_specs = []
        transforms = []
        for entry in container["transforms"]:
            spec = TransformSpec(entry["kind"], entry["params"])
            transform_specs.append(spec)
            transforms.append(build_transform(spec).load_state(entry["state"]))
        c = container["classifier"]
        classifier_spec = ClassifierSpec(c["kind"], c["params"], c["seed"])
        classifier = build_classifier(classifier_spec).load_state(c["state"])
        return cls(transforms=transforms, classifier=classifier,
                   classifier_spec=classifier_spec, transform_specs=transform_specs,
                   fit_seconds=container["meta"].get("fit_seconds", 0.0))


def fit(classifier_spec: ClassifierSpec, transform_specs: list[TransformSpec],
        X: np.ndarray, y: np.ndarray, positive_label=None) -> TrainedPipeline:
    """Fit the transform chain in order, then the classifier on its output."""
    start = time.perf_counter()
    X = np.asarray(X, dtype=float)
    transforms = []
    for spec in list(transform_specs):
        transform, X = fit_transform(spec, X)
        transforms.append(transform)
    classifier = build_classifier(classifier_spec)
    classifier.fit(X, y, positive_label=positive_label)
    return TrainedPipeline(transforms=transforms, classifier=classifier,
                           classifier_spec=classifier_spec,
                           transform_specs=list(transform_specs),
                           fit_seconds=time.perf_counter() - start)


# ---------------------------------------------------------------------------
# hyperparameter schemas for random search
# ---------------------------------------------------------------------------

def _log_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def sample_classifier_params(kind: str, rng: np.random.Generator) -> dict:
    if kind in ("random_forest", "extra_trees"):
        depth_options = [None] + list(range(4, 33))
        return {"n_trees": int(rng.integers(16, 513)),
                "max_depth": depth_options[rng.integers(len(depth_options))],
                "min_leaf": int(rng.integers(1, 9))}
    if kind == "decision_tree":
        depth_options = [None] + list(range(4, 33))
        return {"max_depth": depth_options[rng.integers(len(depth_options))],
                "min_leaf": int(rng.integers(1, 9))}
    if kind == "knn":
        return {"k": int(rng.choice(np.arange(1, 32, 2)))}
    if kind == "linear_svm":
        return {"C": _log_uniform(rng, 1e-3, 1e3)}
    if kind == "mlp":
        n_layers = int(rng.integers(1, 4))
        widths = [int(rng.choice([25, 50, 100])) for _ in range(n_layers)]
        return {"hidden_layers": widths,
                "learning_rate": _log_uniform(rng, 1e-4, 1e-2)}
    if kind == "gaussian_nb":
        return {"var_floor": _log_uniform(rng, 1e-12, 1e-6)}
    if kind == "qda":
        return {"ridge_scale": _log_uniform(rng, 1e-8, 1e-2)}
    raise ValueError(f"unknown classifier kind {kind!r}")


def sample_transform_params(kind: str, rng: np.random.Generator) -> dict:
    if kind == "pca":
        return {"variance_target": float(rng.uniform(0.8, 0.999))}
    if kind == "variance_threshold":
        return {"tau": float(rng.uniform(0.0, 1e-3))}
    return {}  # normalizer / standardizer / minmax have no hyperparameters
