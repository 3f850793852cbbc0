"""Shared classifier contract, feature encoding, and model serialization.

Every algorithm exposes fit(dataset, **hyperparams) -> model object with
predict(X) -> class ids, state_dict() -> JSON-able dict, and a from_state()
constructor.  The Classifier wrapper adds schema checking, timing, and the
versioned JSON document format.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import ARTIFACT_VERSION
from ..rules.dataset import Dataset, Feature


class SchemaError(ValueError):
    """Instance schema does not match the model's training schema."""


def encode_features(features: tuple[Feature, ...], X: np.ndarray) -> np.ndarray:
    """One-hot encode categorical columns, pass numerics through."""
    cols = []
    for j, f in enumerate(features):
        if f.kind == "categorical":
            codes = X[:, j].astype(int)
            onehot = np.zeros((len(X), len(f.categories)))
            onehot[np.arange(len(X)), codes] = 1.0
            cols.append(onehot)
        else:
            cols.append(X[:, j : j + 1])
    return np.hstack(cols)


def encoded_width(features: tuple[Feature, ...]) -> int:
    return sum(len(f.categories) if f.kind == "categorical" else 1 for f in features)


@dataclass
class Classifier:
    algorithm: str
    hyperparams: dict
    features: tuple[Feature, ...]
    n_classes: int
    model: object
    train_time_ms: float = 0.0
    filter_params: dict | None = None

    def predict(self, ds: Dataset) -> np.ndarray:
        if ds.features != self.features:
            raise SchemaError(
                f"dataset schema does not match the {self.algorithm} model's "
                "training schema (check the filter)"
            )
        return self.model.predict(ds.X)

    def predict_rows(self, X: np.ndarray) -> np.ndarray:
        return self.model.predict(np.atleast_2d(np.asarray(X, dtype=float)))

    def accuracy(self, ds: Dataset) -> float:
        return float((self.predict(ds) == ds.y).mean())


def _registry():
    from . import bayes, c45, ffnn, nbtree, svm, trees

    return {
        "cart": trees.CartModel,
        "c45": c45.C45Model,
        "naivebayes": bayes.NaiveBayesModel,
        "hnb": bayes.HnbModel,
        "nbtree": nbtree.NbTreeModel,
        "smo": svm.SmoModel,
        "svm": svm.SvmModel,
        "ffnn": ffnn.FfnnModel,
    }


ALGORITHMS = ("ffnn", "c45", "nbtree", "cart", "naivebayes", "smo", "hnb", "svm")


def fit_classifier(
    algorithm: str,
    ds: Dataset,
    filter_params: dict | None = None,
    **hyperparams,
) -> Classifier:
    registry = _registry()
    if algorithm not in registry:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    cls = registry[algorithm]
    t0 = time.perf_counter()
    model = cls.fit(ds, **hyperparams)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0
    return Classifier(
        algorithm=algorithm,
        hyperparams=dict(hyperparams),
        features=ds.features,
        n_classes=ds.n_classes,
        model=model,
        train_time_ms=elapsed_ms,
        filter_params=filter_params,
    )


def save_classifier(clf: Classifier, path: str | Path) -> None:
    doc = {
        "artifact_version": ARTIFACT_VERSION,
        "algorithm": clf.algorithm,
        "hyperparams": clf.hyperparams,
        "features": [f.as_dict() for f in clf.features],
        "n_classes": clf.n_classes,
        "train_time_ms": clf.train_time_ms,
        "filter_params": clf.filter_params,
        "state": clf.model.state_dict(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_classifier(path: str | Path) -> Classifier:
    with open(path) as fh:
        doc = json.load(fh)
    if doc["artifact_version"] != ARTIFACT_VERSION:
        raise ValueError(f"unsupported artifact version {doc['artifact_version']}")
    registry = _registry()
    cls = registry[doc["algorithm"]]
    return Classifier(
        algorithm=doc["algorithm"],
        hyperparams=doc["hyperparams"],
        features=tuple(Feature.from_dict(d) for d in doc["features"]),
        n_classes=doc["n_classes"],
        model=cls.from_state(doc["state"]),
        train_time_ms=doc["train_time_ms"],
        filter_params=doc.get("filter_params"),
    )
