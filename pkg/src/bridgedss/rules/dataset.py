"""Tabular dataset with a mixed categorical/numeric schema.

Columns are stored in one float matrix; categorical columns hold category
codes and carry their category names in the schema.  The class column is the
control-action id.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..config import DAY_TYPES, INTERVALS, SEASONS, WEATHERS, ScenarioFactors
from ..corridor.datagen import ScenarioRecord
from ..corridor.scenario import ACTIONS

SEVERITY_LEVELS = {"none": 0.0, "minor": 0.25, "moderate": 0.5, "severe": 0.9}
NUM_CLASSES = len(ACTIONS)


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str  # "categorical" | "numeric"
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("categorical", "numeric"):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == "categorical" and not self.categories:
            raise ValueError(f"categorical feature {self.name} needs categories")

    def as_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "categories": list(self.categories)}

    @staticmethod
    def from_dict(d: dict) -> "Feature":
        return Feature(d["name"], d["kind"], tuple(d.get("categories", ())))


BRIDGE_FEATURES: tuple[Feature, ...] = (
    Feature("weather", "categorical", WEATHERS),
    Feature("day_type", "categorical", DAY_TYPES),
    Feature("interval", "categorical", INTERVALS),
    Feature("season", "categorical", SEASONS),
    Feature("severity_level", "numeric"),
    Feature("location_index", "numeric"),
    Feature("demand_multiplier", "numeric"),
    Feature("detector_speed", "numeric"),
    Feature("detector_occupancy", "numeric"),
)


class Dataset:
    def __init__(
        self,
        features: tuple[Feature, ...],
        X: np.ndarray,
        y: np.ndarray,
        n_classes: int = NUM_CLASSES,
    ):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        if X.ndim != 2 or X.shape[1] != len(features):
            raise ValueError("X shape does not match the feature schema")
        if len(y) != len(X):
            raise ValueError("X and y length mismatch")
        if not np.isfinite(X).all():
            raise ValueError("features must be finite")
        if len(y) and (y.min() < 0 or y.max() >= n_classes):
            raise ValueError("class id out of range")
        self.features = tuple(features)
        self.X = X
        self.y = y
        self.n_classes = n_classes

    def __len__(self) -> int:
        return len(self.X)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.index_of(name)]

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise KeyError(name)

    @property
    def numeric_indices(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.kind == "numeric"]

    @property
    def categorical_indices(self) -> list[int]:
        return [i for i, f in enumerate(self.features) if f.kind == "categorical"]

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.features, self.X[idx], self.y[idx], self.n_classes)

    def with_columns(self, X: np.ndarray, features: tuple[Feature, ...] | None = None) -> "Dataset":
        return Dataset(features or self.features, X, self.y, self.n_classes)

    def schema_matches(self, other: "Dataset") -> bool:
        return self.features == other.features

    def display_value(self, col: int, value: float) -> str:
        f = self.features[col]
        if f.kind == "categorical":
            return f.categories[int(value)]
        return repr(float(value))


def instances_from_records(
    records: list[ScenarioRecord], factors: ScenarioFactors | None = None
) -> Dataset:
    """Labeled instances for the learning pipeline, one per scenario run."""
    factors = factors or ScenarioFactors()
    X = np.empty((len(records), len(BRIDGE_FEATURES)))
    y = np.empty(len(records), dtype=int)
    for i, rec in enumerate(records):
        s = rec.scenario
        X[i] = (
            WEATHERS.index(s.weather),
            DAY_TYPES.index(s.day_type),
            INTERVALS.index(s.interval),
            SEASONS.index(s.season),
            SEVERITY_LEVELS[s.incident_severity],
            float(s.incident_location),
            factors.demand_multiplier(s.day_type, s.interval, s.season, s.demand_level),
            rec.detector_speed_kmh,
            rec.detector_occupancy,
        )
        y[i] = rec.action_id
    return Dataset(BRIDGE_FEATURES, X, y)


def write_dataset_csv(ds: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f.name for f in ds.features] + ["class"])
        for i in range(len(ds)):
            row = [ds.display_value(j, ds.X[i, j]) for j in range(len(ds.features))]
            writer.writerow(row + [int(ds.y[i])])


def write_dataset_jsonl(ds: Dataset, path: str | Path) -> None:
    with open(path, "w") as fh:
        for i in range(len(ds)):
            obj = {
                f.name: (f.categories[int(ds.X[i, j])] if f.kind == "categorical" else float(ds.X[i, j]))
                for j, f in enumerate(ds.features)
            }
            obj["class"] = int(ds.y[i])
            fh.write(json.dumps(obj) + "\n")


def read_dataset_csv(path: str | Path, features: tuple[Feature, ...]) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = [f.name for f in features] + ["class"]
        if header != expected:
            raise ValueError(f"unexpected dataset header {header}")
        rows = list(reader)
    X = np.empty((len(rows), len(features)))
    y = np.empty(len(rows), dtype=int)
    for i, row in enumerate(rows):
        for j, f in enumerate(features):
            X[i, j] = f.categories.index(row[j]) if f.kind == "categorical" else float(row[j])
        y[i] = int(row[-1])
    return Dataset(features, X, y)


def write_arff(ds: Dataset, path: str | Path, relation: str = "bridge-rules") -> None:
    """ARFF export so attribute declarations and counts can be cross-checked
    in any WEKA installation."""
    lines = [f"@relation {relation}", ""]
    for f in ds.features:
        if f.kind == "categorical":
            lines.append(f"@attribute {f.name} {{{','.join(f.categories)}}}")
        else:
            lines.append(f"@attribute {f.name} numeric")
    classes = ",".join(f"a{k}" for k in range(ds.n_classes))
    lines.append(f"@attribute class {{{classes}}}")
    lines.append("")
    lines.append("@data")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
        for i in range(len(ds)):
            row = [ds.display_value(j, ds.X[i, j]) for j in range(len(ds.features))]
            fh.write(",".join(row + [f"a{int(ds.y[i])}"]) + "\n")
