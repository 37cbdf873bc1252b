"""Stacked autoencoder + LSTM classification of UGRansome-format netflow data."""

import json as _json

from ._saelstm import (
    ARTIFACT_VERSION,
    OUTPUT_DIR_ENV,
    ConfigError,
    DataError,
    DomainError,
    Error,
    FormatError,
    IntegrityError,
    InternalError,
    Model,
    NumericFailure,
    SchemaError,
    ShapeError,
    confusion_matrix,
    param_counts,
    softmax,
    weighted_average,
    write_synthetic,
)
from . import _saelstm

__all__ = [
    "ARTIFACT_VERSION",
    "OUTPUT_DIR_ENV",
    "ConfigError",
    "DataError",
    "DomainError",
    "Error",
    "FormatError",
    "IntegrityError",
    "InternalError",
    "Model",
    "NumericFailure",
    "SchemaError",
    "ShapeError",
    "classification_report",
    "confusion_matrix",
    "default_config",
    "evaluate",
    "param_counts",
    "run_pipeline",
    "softmax",
    "weighted_average",
    "write_synthetic",
]


def default_config():
    return _json.loads(_saelstm._default_config())


def run_pipeline(config=None, write_outputs=True, **overrides):
    """Run preprocess -> SAE -> LSTM -> evaluate and return the report dict.

    config is a dict in the JSON config layout; keyword overrides are merged
    on top at the top level (e.g. data=..., seed=...).
    """
    cfg = dict(config or {})
    cfg.update({k: str(v) if k in ("data", "schema", "output_dir") else v for k, v in overrides.items()})
    return _json.loads(_saelstm._run_pipeline(_json.dumps(cfg), write_outputs))


def evaluate(model, data):
    """Score a raw CSV with a trained Model; returns the metrics dict."""
    return _json.loads(model._evaluate(str(data)))


def classification_report(truth, predicted, labels):
    return _json.loads(_saelstm._classification_report(list(truth), list(predicted), list(labels)))
