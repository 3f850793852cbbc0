"""NBTree: decision-tree nodes with Naive Bayes leaves.

A split is accepted only when the 5-fold cross-validated accuracy of Naive
Bayes models in the children beats the node's own Naive Bayes by more than
5% relative, and only on nodes of at least 30 instances.
"""

from __future__ import annotations

import numpy as np

from ..rules.dataset import Dataset
from .bayes import NaiveBayesModel
from .c45 import entropy

MIN_NODE = 30
REL_IMPROVEMENT = 0.05
CV_FOLDS = 5
CANDIDATE_FEATURES = 3  # CV-evaluate only the best features by info gain


def _folds(n: int, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    assignment = np.arange(n) % k
    return rng.permutation(assignment)


def _cv_accuracy(ds: Dataset, fold_of: np.ndarray) -> float:
    """5-fold CV accuracy of a single NB on the dataset."""
    correct = 0
    for f in range(CV_FOLDS):
        val = fold_of == f
        if not val.any() or val.all():
            continue
        nb = NaiveBayesModel.fit(ds.subset(~val))
        correct += int((nb.predict(ds.X[val]) == ds.y[val]).sum())
    return correct / len(ds)


def _info_gain_candidates(ds: Dataset):
    """Per feature, the best split candidate scored by information gain."""
    y = ds.y
    parent_h = entropy(np.bincount(y, minlength=ds.n_classes).astype(float))
    n = len(y)
    candidates = []
    for j, f in enumerate(ds.features):
        col = ds.X[:, j]
        if f.kind == "categorical":
            codes = col.astype(int)
            present = np.unique(codes)
            if len(present) < 2:
                continue
            cond = 0.0
            for c in present:
                part = y[codes == c]
                cond += len(part) / n * entropy(np.bincount(part, minlength=ds.n_classes).astype(float))
            candidates.append((parent_h - cond, j, "categorical", 0.0))
        else:
            order = np.argsort(col, kind="stable")
            xs, ys = col[order], y[order]
            boundaries = np.nonzero(xs[1:] > xs[:-1])[0]
            best = None
            for b in boundaries:
                left, right = ys[: b + 1], ys[b + 1 :]
                cond = (
                    len(left) / n * entropy(np.bincount(left, minlength=ds.n_classes).astype(float))
                    + len(right) / n * entropy(np.bincount(right, minlength=ds.n_classes).astype(float))
                )
                gain = parent_h - cond
                if best is None or gain > best[0]:
                    best = (gain, j, "numeric", float((xs[b] + xs[b + 1]) / 2.0))
            if best is not None:
                candidates.append(best)
    candidates.sort(key=lambda c: (-c[0], c[1]))
    return candidates[:CANDIDATE_FEATURES]


def _partition(ds: Dataset, j: int, kind: str, threshold: float) -> list[np.ndarray]:
    col = ds.X[:, j]
    if kind == "categorical":
        codes = col.astype(int)
        return [np.nonzero(codes == c)[0] for c in range(len(ds.features[j].categories))]
    mask = col <= threshold
    return [np.nonzero(mask)[0], np.nonzero(~mask)[0]]


class _Node:
    __slots__ = ("feature", "kind", "threshold", "children", "nb", "majority")

    def __init__(self):
        self.feature = -1
        self.kind = ""
        self.threshold = 0.0
        self.children: list["_Node"] | None = None
        self.nb: NaiveBayesModel | None = None
        self.majority = 0

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def to_dict(self) -> dict:
        d = {"majority": int(self.majority)}
        if self.is_leaf:
            d["nb"] = self.nb.state_dict()
        else:
            d.update(
                feature=self.feature,
                kind=self.kind,
                threshold=self.threshold,
                children=[c.to_dict() for c in self.children],
            )
        return d

    @staticmethod
    def from_dict(d: dict) -> "_Node":
        node = _Node()
        node.majority = d["majority"]
        if "nb" in d:
            node.nb = NaiveBayesModel.from_state(d["nb"])
        else:
            node.feature = d["feature"]
            node.kind = d["kind"]
            node.threshold = d["threshold"]
            node.children = [_Node.from_dict(c) for c in d["children"]]
        return node


def _grow(ds: Dataset, seed: int) -> _Node:
    node = _Node()
    counts = np.bincount(ds.y, minlength=ds.n_classes)
    node.majority = int(np.argmax(counts))
    pure = (counts > 0).sum() <= 1
    if len(ds) < MIN_NODE or pure:
        node.nb = NaiveBayesModel.fit(ds)
        return node
    fold_of = _folds(len(ds), CV_FOLDS, seed)
    base_acc = _cv_accuracy(ds, fold_of)
    best = None  # (utility, feature j, kind, threshold, parts)
    for gain, j, kind, thr in _info_gain_candidates(ds):
        if gain <= 1e-12:
            continue
        parts = _partition(ds, j, kind, thr)
        correct = 0
        for idx in parts:
            if len(idx) == 0:
                continue
            sub = ds.subset(idx)
            sub_folds = fold_of[idx]
            for f in range(CV_FOLDS):
                val = sub_folds == f
                if not val.any():
                    continue
                if val.all():
                    correct += int((np.full(val.sum(), node.majority) == sub.y[val]).sum())
                    continue
                nb = NaiveBayesModel.fit(sub.subset(~val))
                correct += int((nb.predict(sub.X[val]) == sub.y[val]).sum())
        utility = correct / len(ds)
        if best is None or utility > best[0]:
            best = (utility, j, kind, thr, parts)
    if best is None or best[0] <= base_acc * (1.0 + REL_IMPROVEMENT):
        node.nb = NaiveBayesModel.fit(ds)
        return node
    _, j, kind, thr, parts = best
    node.feature = j
    node.kind = kind
    node.threshold = thr
    node.children = []
    for idx in parts:
        if len(idx) == 0:
            leaf = _Node()
            leaf.majority = node.majority
            leaf.nb = NaiveBayesModel.fit(ds)  # fall back to the parent's model
            node.children.append(leaf)
        else:
            node.children.append(_grow(ds.subset(idx), seed + 1))
    return node


class NbTreeModel:
    def __init__(self, root: _Node, n_classes: int):
        self.root = root
        self.n_classes = n_classes

    @classmethod
    def fit(cls, ds: Dataset, seed: int = 17) -> "NbTreeModel":
        if len(ds) == 0:
            raise ValueError("empty dataset")
        return cls(_grow(ds, seed), ds.n_classes)

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X), dtype=int)

        def route(node: _Node, idx: np.ndarray) -> None:
            if len(idx) == 0:
                return
            if node.is_leaf:
                out[idx] = node.nb.predict(X[idx])
                return
            col = X[idx, node.feature]
            if node.kind == "numeric":
                mask = col <= node.threshold
                route(node.children[0], idx[mask])
                route(node.children[1], idx[~mask])
            else:
                codes = col.astype(int)
                for c, child in enumerate(node.children):
                    route(child, idx[codes == c])

        route(self.root, np.arange(len(X)))
        return out

    def split_count(self) -> int:
        def count(node: _Node) -> int:
            return 0 if node.is_leaf else 1 + sum(count(c) for c in node.children)

        return count(self.root)

    def state_dict(self) -> dict:
        return {"n_classes": self.n_classes, "root": self.root.to_dict()}

    @classmethod
    def from_state(cls, state: dict) -> "NbTreeModel":
        return cls(_Node.from_dict(state["root"]), state["n_classes"])
