"""The two preprocessing filters: min-max normalization and equal-width
discretization.  Both retain their fitted parameters so live instances can be
transformed with exactly the statistics frozen at training time."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset, Feature


class NormalFilter:
    """Min-max scale every numeric feature to [0, 1]; constants map to 0."""

    name = "normal"

    def __init__(self):
        self.lo: dict[str, float] = {}
        self.hi: dict[str, float] = {}

    def fit(self, ds: Dataset) -> "NormalFilter":
        for i in ds.numeric_indices:
            col = ds.X[:, i]
            self.lo[ds.features[i].name] = float(col.min())
            self.hi[ds.features[i].name] = float(col.max())
        return self

    def transform(self, ds: Dataset) -> Dataset:
        X = ds.X.copy()
        for i in ds.numeric_indices:
            name = ds.features[i].name
            lo, hi = self.lo[name], self.hi[name]
            if hi > lo:
                X[:, i] = (X[:, i] - lo) / (hi - lo)
            else:
                X[:, i] = 0.0
        return ds.with_columns(X)

    def transform_features(self, features: tuple[Feature, ...]) -> tuple[Feature, ...]:
        return features

    def transform_row(self, features: tuple[Feature, ...], row: np.ndarray) -> np.ndarray:
        out = np.asarray(row, dtype=float).copy()
        for i, f in enumerate(features):
            if f.kind != "numeric":
                continue
            lo, hi = self.lo[f.name], self.hi[f.name]
            out[i] = (out[i] - lo) / (hi - lo) if hi > lo else 0.0
        return out

    def params(self) -> dict:
        return {"kind": self.name, "lo": self.lo, "hi": self.hi}

    @staticmethod
    def from_params(params: dict) -> "NormalFilter":
        f = NormalFilter()
        f.lo = {k: float(v) for k, v in params["lo"].items()}
        f.hi = {k: float(v) for k, v in params["hi"].items()}
        return f


class DiscreteFilter:
    """Replace each numeric feature with an equal-width bin label over its
    observed [min, max]; the max value falls in the last bin."""

    name = "discrete"

    def __init__(self, bins: int = 10):
        if bins < 2:
            raise ValueError("bins must be at least 2")
        self.bins = bins
        self.lo: dict[str, float] = {}
        self.hi: dict[str, float] = {}

    def fit(self, ds: Dataset) -> "DiscreteFilter":
        for i in ds.numeric_indices:
            col = ds.X[:, i]
            self.lo[ds.features[i].name] = float(col.min())
            self.hi[ds.features[i].name] = float(col.max())
        return self

    def _bin(self, name: str, values: np.ndarray) -> np.ndarray:
        lo, hi = self.lo[name], self.hi[name]
        if hi <= lo:
            return np.zeros_like(values)
        raw = np.floor((values - lo) / (hi - lo) * self.bins)
        return np.clip(raw, 0, self.bins - 1)

    def transform(self, ds: Dataset) -> Dataset:
        X = ds.X.copy()
        for i in ds.numeric_indices:
            X[:, i] = self._bin(ds.features[i].name, X[:, i])
        return Dataset(self.transform_features(ds.features), X, ds.y, ds.n_classes)

    def transform_features(self, features: tuple[Feature, ...]) -> tuple[Feature, ...]:
        bin_names = tuple(f"b{k}" for k in range(self.bins))
        return tuple(
            Feature(f.name, "categorical", bin_names) if f.kind == "numeric" else f
            for f in features
        )

    def transform_row(self, features: tuple[Feature, ...], row: np.ndarray) -> np.ndarray:
        out = np.asarray(row, dtype=float).copy()
        for i, f in enumerate(features):
            if f.kind == "numeric":
                out[i] = self._bin(f.name, np.array([out[i]]))[0]
        return out

    def params(self) -> dict:
        return {"kind": self.name, "bins": self.bins, "lo": self.lo, "hi": self.hi}

    @staticmethod
    def from_params(params: dict) -> "DiscreteFilter":
        f = DiscreteFilter(bins=int(params["bins"]))
        f.lo = {k: float(v) for k, v in params["lo"].items()}
        f.hi = {k: float(v) for k, v in params["hi"].items()}
        return f


def normal_filter(ds: Dataset) -> tuple[Dataset, NormalFilter]:
    filt = NormalFilter().fit(ds)
    return filt.transform(ds), filt


def discrete_filter(ds: Dataset, bins: int = 10) -> tuple[Dataset, DiscreteFilter]:
    filt = DiscreteFilter(bins=bins).fit(ds)
    return filt.transform(ds), filt


def filter_from_params(params: dict):
    if params["kind"] == "normal":
        return NormalFilter.from_params(params)
    if params["kind"] == "discrete":
        return DiscreteFilter.from_params(params)
    raise ValueError(f"unknown filter kind {params['kind']!r}")


def make_filter(kind: str):
    if kind == "normal":
        return NormalFilter()
    if kind == "discrete":
        return DiscreteFilter()
    raise ValueError(f"unknown filter kind {kind!r}")
