"""CART: binary classification tree grown by Gini impurity reduction.

Numeric candidates are midpoints between consecutive distinct sorted values;
categorical candidates are one-vs-rest per category.  Ties break toward the
lower feature index, then the lower threshold/category.  Splitting continues
while the node is impure and any feature still varies, so a conflict-free
dataset always trains to 100%.
"""

from __future__ import annotations

import numpy as np

from ..rules.dataset import Dataset


def gini_impurity(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=float)
    if (counts < 0).any():
        raise ValueError("class counts must be non-negative")
    total = counts.sum()
    if total == 0:
        raise ValueError("class counts must not all be zero")
    p = counts / total
    return float(1.0 - (p * p).sum())


def _class_counts(y: np.ndarray, n_classes: int) -> np.ndarray:
    return np.bincount(y, minlength=n_classes).astype(float)


def best_split(ds: Dataset):
    """Best (feature, split, impurity decrease) over all candidates.

    Returns None when every feature is constant on the node.  For numeric
    features the split is a threshold (x <= t goes left); for categorical the
    split is a category (x == c goes left).
    """
    y = ds.y
    n = len(y)
    if n < 2:
        return None
    n_classes = ds.n_classes
    parent_counts = _class_counts(y, n_classes)
    if (parent_counts > 0).sum() < 2:
        return None  # pure node
    parent_gini = gini_impurity(parent_counts)
    best = None  # (decrease, feature, kind, value)

    def better(cand, cur):
        d, j, _, v = cand
        if cur is None:
            return True
        dc, jc, _, vc = cur
        return d > dc + 1e-15 or (abs(d - dc) <= 1e-15 and (j, v) < (jc, vc))

    for j, f in enumerate(ds.features):
        col = ds.X[:, j]
        if f.kind == "numeric":
            order = np.argsort(col, kind="stable")
            xs = col[order]
            ys = y[order]
            boundaries = np.nonzero(xs[1:] > xs[:-1])[0]
            if len(boundaries) == 0:
                continue
            onehot = np.zeros((n, n_classes))
            onehot[np.arange(n), ys] = 1.0
            left_cum = onehot.cumsum(axis=0)
            for b in boundaries:
                left = left_cum[b]
                right = parent_counts - left
                nl = b + 1.0
                nr = n - nl
                dec = parent_gini - (
                    nl / n * gini_impurity(left) + nr / n * gini_impurity(right)
                )
                cand = (dec, j, "numeric", float((xs[b] + xs[b + 1]) / 2.0))
                if better(cand, best):
                    best = cand
        else:
            codes = col.astype(int)
            present = np.unique(codes)
            if len(present) < 2:
                continue
            for c in present:
                mask = codes == c
                left = _class_counts(y[mask], n_classes)
                right = parent_counts - left
                nl = float(mask.sum())
                nr = n - nl
                dec = parent_gini - (
                    nl / n * gini_impurity(left) + nr / n * gini_impurity(right)
                )
                cand = (dec, j, "categorical", float(c))
                if better(cand, best):
                    best = cand
    if best is None:
        return None
    dec, j, kind, value = best
    return {"feature": j, "kind": kind, "value": value, "decrease": dec}


class _Node:
    __slots__ = ("feature", "kind", "value", "left", "right", "counts", "label")

    def __init__(self):
        self.feature = -1
        self.kind = ""
        self.value = 0.0
        self.left = None
        self.right = None
        self.counts = None
        self.label = -1

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"counts": list(self.counts), "label": int(self.label)}
        return {
            "feature": self.feature,
            "kind": self.kind,
            "value": self.value,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
            "counts": list(self.counts),
        }

    @staticmethod
    def from_dict(d: dict) -> "_Node":
        node = _Node()
        node.counts = np.asarray(d["counts"], dtype=float)
        if "feature" in d:
            node.feature = d["feature"]
            node.kind = d["kind"]
            node.value = d["value"]
            node.left = _Node.from_dict(d["left"])
            node.right = _Node.from_dict(d["right"])
        else:
            node.label = d["label"]
        return node


def _majority(counts: np.ndarray) -> int:
    return int(np.argmax(counts))  # argmax takes the lower class id on ties


def grow_tree(ds: Dataset, min_leaf: int = 2) -> _Node:
    node = _Node()
    node.counts = _class_counts(ds.y, ds.n_classes)
    pure = (node.counts > 0).sum() <= 1
    split = None
    if not pure and len(ds) >= min_leaf:
        split = best_split(ds)
    if split is None:
        node.label = _majority(node.counts)
        return node
    col = ds.X[:, split["feature"]]
    if split["kind"] == "numeric":
        mask = col <= split["value"]
    else:
        mask = col.astype(int) == int(split["value"])
    node.feature = split["feature"]
    node.kind = split["kind"]
    node.value = split["value"]
    node.left = grow_tree(ds.subset(mask), min_leaf)
    node.right = grow_tree(ds.subset(~mask), min_leaf)
    return node


def predict_tree(root: _Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X), dtype=int)

    def route(node: _Node, idx: np.ndarray) -> None:
        if len(idx) == 0:
            return
        if node.is_leaf:
            out[idx] = node.label
            return
        col = X[idx, node.feature]
        if node.kind == "numeric":
            mask = col <= node.value
        else:
            mask = col.astype(int) == int(node.value)
        route(node.left, idx[mask])
        route(node.right, idx[~mask])

    route(root, np.arange(len(X)))
    return out


class CartModel:
    def __init__(self, root: _Node, n_classes: int):
        self.root = root
        self.n_classes = n_classes

    @classmethod
    def fit(cls, ds: Dataset, min_leaf: int = 2) -> "CartModel":
        if len(ds) == 0:
            raise ValueError("empty dataset")
        return cls(grow_tree(ds, min_leaf=min_leaf), ds.n_classes)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return predict_tree(self.root, X)

    def node_count(self) -> int:
        def count(node):
            return 1 if node.is_leaf else 1 + count(node.left) + count(node.right)

        return count(self.root)

    def depth(self) -> int:
        def d(node):
            return 0 if node.is_leaf else 1 + max(d(node.left), d(node.right))

        return d(self.root)

    def state_dict(self) -> dict:
        return {"n_classes": self.n_classes, "root": self.root.to_dict()}

    @classmethod
    def from_state(cls, state: dict) -> "CartModel":
        return cls(_Node.from_dict(state["root"]), state["n_classes"])
