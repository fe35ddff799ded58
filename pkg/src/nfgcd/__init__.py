"""Static neural-field classifier and episodic evaluation harness for
generalized category discovery."""

from .classifier import (
    ClassField,
    NfClassifier,
    PredictionOutcome,
    SampleField,
    class_activations,
    count_active,
    fit_support,
    incorporate_novel,
    predict,
    sample_activations,
)
from .kernel import KernelParams, activation, dog_kernel, excitatory_radius
from .metrics import MetricSpec, mahalanobis_precision, metric_distance, metric_distances

__version__ = "0.1.0"

__all__ = [
    "ClassField",
    "KernelParams",
    "MetricSpec",
    "NfClassifier",
    "PredictionOutcome",
    "SampleField",
    "activation",
    "class_activations",
    "count_active",
    "dog_kernel",
    "excitatory_radius",
    "fit_support",
    "incorporate_novel",
    "mahalanobis_precision",
    "metric_distance",
    "metric_distances",
    "predict",
    "sample_activations",
]
