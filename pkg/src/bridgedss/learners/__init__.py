from .base import (
    ALGORITHMS,
    Classifier,
    SchemaError,
    encode_features,
    fit_classifier,
    load_classifier,
    save_classifier,
)

__all__ = [
    "ALGORITHMS",
    "Classifier",
    "SchemaError",
    "encode_features",
    "fit_classifier",
    "save_classifier",
    "load_classifier",
]
