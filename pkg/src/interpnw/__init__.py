"""Interpolating Nadaraya-Watson regression with singular kernels."""

__version__ = "0.1.0"

from interpnw.estimator import (  # noqa: E402
    BatchPrediction,
    Case,
    Dataset,
    FittedInterpolator,
    PredictionOutcome,
    bandwidth_for_rate,
    fit,
    predict,
    predict_batch,
    predict_class,
    predict_many,
    radius_neighbors,
)
from interpnw.kernels import KernelSpec, Variant  # noqa: E402

__all__ = [
    "BatchPrediction",
    "Case",
    "Dataset",
    "FittedInterpolator",
    "KernelSpec",
    "PredictionOutcome",
    "Variant",
    "bandwidth_for_rate",
    "fit",
    "predict",
    "predict_batch",
    "predict_class",
    "predict_many",
    "radius_neighbors",
]
