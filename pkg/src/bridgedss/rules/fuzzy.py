"""Wang-Mendel fuzzy rule extraction.

Each numeric feature gets uniform triangular membership functions with 50%
overlap and shouldered ends.  An instance maps to its max-membership term per
feature; the rule degree is the product of those memberships; antecedent
conflicts keep the max-degree rule.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset

log = logging.getLogger(__name__)

# Partition sizes tuned for the bridge pipeline: scenario-derived numerics
# use coarse linguistic scales, detector readings keep enough resolution
# that per-class value spreads stay informative.
DEFAULT_PARTITION_OVERRIDES: dict[str, int] = {
    "demand_multiplier": 7,
    "detector_speed": 17,
    "detector_occupancy": 17,
}


@dataclass(frozen=True)
class FuzzyPartition:
    feature_name: str
    centers: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def step(self) -> float:
        return self.centers[1] - self.centers[0] if self.k > 1 else 0.0

    def memberships(self, x: float) -> np.ndarray:
        """Triangular memberships; interior values sum to 1."""
        c = np.asarray(self.centers)
        if self.k == 1:
            return np.ones(1)
        m = np.maximum(0.0, 1.0 - np.abs(x - c) / self.step)
        if x <= c[0]:
            m[0] = 1.0
        if x >= c[-1]:
            m[-1] = 1.0
        return m

    def term(self, x: float) -> int:
        """Max-membership term index; midpoint ties go to the lower index."""
        return int(np.argmax(self.memberships(x)))

    def clamp(self, x: float) -> float:
        return min(max(x, self.centers[0]), self.centers[-1])


@dataclass(frozen=True)
class FuzzyRule:
    antecedent: tuple  # one literal per categorical, one term index per numeric
    consequent: int
    degree: float


class RuleBase:
    def __init__(self, feature_names: tuple[str, ...]):
        self.feature_names = feature_names
        self.rules: dict[tuple, FuzzyRule] = {}
        self.support: dict[tuple, int] = {}

    def __len__(self) -> int:
        return len(self.rules)

    def add(self, antecedent: tuple, consequent: int, degree: float) -> None:
        if degree <= 0:
            raise ValueError("rule degree must be positive")
        self.support[antecedent] = self.support.get(antecedent, 0) + 1
        cur = self.rules.get(antecedent)
        if cur is None or degree > cur.degree or (
            degree == cur.degree and consequent < cur.consequent
        ):
            self.rules[antecedent] = FuzzyRule(antecedent, consequent, degree)


def build_partitions(
    ds: Dataset,
    k: int = 5,
    overrides: dict[str, int] | None = None,
) -> dict[str, FuzzyPartition]:
    """Uniform partitions over each numeric feature's observed [min, max].

    Constant features degenerate to a single center.
    """
    if len(ds) == 0:
        raise ValueError("cannot build partitions from an empty dataset")
    if k < 2:
        raise ValueError("k must be at least 2")
    overrides = overrides or {}
    partitions = {}
    for i in ds.numeric_indices:
        name = ds.features[i].name
        col = ds.X[:, i]
        lo, hi = float(col.min()), float(col.max())
        kf = overrides.get(name, k)
        if hi <= lo:
            centers = (lo,)
        else:
            centers = tuple(np.linspace(lo, hi, kf))
        partitions[name] = FuzzyPartition(name, centers)
    return partitions


def extract_rules(ds: Dataset, partitions: dict[str, FuzzyPartition]) -> RuleBase:
    for i in ds.numeric_indices:
        if ds.features[i].name not in partitions:
            raise ValueError(f"no partition for numeric feature {ds.features[i].name}")
    base = RuleBase(tuple(f.name for f in ds.features))
    clamped = 0
    for row, cls in zip(ds.X, ds.y):
        antecedent = []
        degree = 1.0
        for j, f in enumerate(ds.features):
            if f.kind == "categorical":
                antecedent.append(int(row[j]))
            else:
                part = partitions[f.name]
                x = float(row[j])
                cx = part.clamp(x)
                if cx != x:
                    clamped += 1
                term = part.term(cx)
                antecedent.append(term)
                degree *= float(part.memberships(cx)[term])
        base.add(tuple(antecedent), int(cls), degree)
    if clamped:
        log.warning("clamped %d out-of-range feature values during rule extraction", clamped)
    return base


def rule_base_to_dataset(
    base: RuleBase, partitions: dict[str, FuzzyPartition], template: Dataset
) -> Dataset:
    """One instance per rule; numeric features become their term centers."""
    if len(base) == 0:
        raise ValueError("empty rule base")
    rules = sorted(base.rules.values(), key=lambda r: r.antecedent)
    X = np.empty((len(rules), len(template.features)))
    y = np.empty(len(rules), dtype=int)
    for i, rule in enumerate(rules):
        for j, f in enumerate(template.features):
            if f.kind == "categorical":
                X[i, j] = rule.antecedent[j]
            else:
                X[i, j] = partitions[f.name].centers[rule.antecedent[j]]
        y[i] = rule.consequent
    return Dataset(template.features, X, y, template.n_classes)
