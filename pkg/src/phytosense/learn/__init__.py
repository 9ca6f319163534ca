"""From-scratch classifiers and preprocessing transforms."""
from .base import BinaryClassifier, derive_seed
from .bayes import QDA, GaussianNB
from .mlp import MLP
from .neighbors import KNN
from .pipeline import (CLASSIFIER_KINDS, ClassifierSpec, TrainedPipeline,
                       TransformSpec, apply_transform, build_classifier,
                       build_transform, fit, fit_transform,
                       sample_classifier_params, sample_transform_params)
from .svm import LinearSVM
from .transforms import (PCA, TRANSFORM_KINDS, MinMaxTransform, Normalizer,
                         Standardizer, VarianceThreshold)
from .trees import DecisionTree, ExtraTrees, RandomForest

__all__ = [
    "BinaryClassifier", "derive_seed",
    "GaussianNB", "QDA", "KNN", "LinearSVM", "MLP",
    "DecisionTree", "RandomForest", "ExtraTrees",
    "Normalizer", "Standardizer", "MinMaxTransform", "VarianceThreshold", "PCA",
    "ClassifierSpec", "TransformSpec", "TrainedPipeline",
    "CLASSIFIER_KINDS", "TRANSFORM_KINDS",
    "fit", "fit_transform", "apply_transform",
    "build_classifier", "build_transform",
    "sample_classifier_params", "sample_transform_params",
]
