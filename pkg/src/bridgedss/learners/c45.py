"""C4.5: gain-ratio splits (multiway on categoricals, binary threshold on
numerics) with pessimistic-error pruning at a configurable confidence."""

from __future__ import annotations

from statistics import NormalDist

import numpy as np

from ..rules.dataset import Dataset


def entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def _counts(y: np.ndarray, n_classes: int) -> np.ndarray:
    return np.bincount(y, minlength=n_classes).astype(float)


def gain_ratio(parent_entropy: float, parts: list[np.ndarray], n_classes: int) -> tuple[float, float]:
    """(gain ratio, information gain) for a partition given as index arrays of y."""
    n = sum(len(p) for p in parts)
    cond = 0.0
    split_info = 0.0
    for p in parts:
        w = len(p) / n
        cond += w * entropy(_counts(p, n_classes))
        if w > 0:
            split_info -= w * np.log2(w)
    gain = parent_entropy - cond
    if split_info <= 1e-12:
        return 0.0, gain
    return gain / split_info, gain


def pessimistic_errors(errors: float, n: float, confidence: float = 0.25) -> float:
    """Pessimistic error-count estimate of a leaf covering n instances with
    `errors` mistakes: observed errors plus the C4.5 upper-bound correction
    (exact binomial at zero errors, continuity-corrected normal otherwise)."""
    if n == 0:
        return 0.0
    if confidence >= 0.5:
        return float(errors)
    if errors == 0:
        return n * (1.0 - confidence ** (1.0 / n))
    if errors < 1:
        base = n * (1.0 - confidence ** (1.0 / n))
        return base + errors * (pessimistic_errors(1.0, n, confidence) - base)
    if errors + 0.5 >= n:
        return float(n)
    z = NormalDist().inv_cdf(1.0 - confidence)
    f = (errors + 0.5) / n
    bound = (
        f
        + z * z / (2 * n)
        + z * np.sqrt(f / n - f * f / n + z * z / (4 * n * n))
    ) / (1 + z * z / n)
    return float(min(bound, 1.0) * n)


class _Node:
    __slots__ = ("feature", "kind", "threshold", "children", "counts", "label")

    def __init__(self):
        self.feature = -1
        self.kind = ""
        self.threshold = 0.0
        self.children: list["_Node"] | None = None
        self.counts = None
        self.label = -1

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def to_dict(self) -> dict:
        d = {"counts": list(self.counts), "label": int(self.label)}
        if not self.is_leaf:
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
        node.counts = np.asarray(d["counts"], dtype=float)
        node.label = d["label"]
        if "children" in d:
            node.feature = d["feature"]
            node.kind = d["kind"]
            node.threshold = d["threshold"]
            node.children = [_Node.from_dict(c) for c in d["children"]]
        return node


def _best_c45_split(ds: Dataset):
    y = ds.y
    n = len(y)
    parent_h = entropy(_counts(y, ds.n_classes))
    best = None  # (ratio, j, kind, threshold, parts)

    def better(cand, cur):
        if cur is None:
            return True
        return cand[0] > cur[0] + 1e-15 or (
            abs(cand[0] - cur[0]) <= 1e-15 and cand[1] < cur[1]
        )

    for j, f in enumerate(ds.features):
        col = ds.X[:, j]
        if f.kind == "categorical":
            codes = col.astype(int)
            present = np.unique(codes)
            if len(present) < 2:
                continue
            parts = [y[codes == c] for c in present]
            ratio, _ = gain_ratio(parent_h, parts, ds.n_classes)
            cand = (ratio, j, "categorical", 0.0, present)
            if better(cand, best):
                best = cand
        else:
            order = np.argsort(col, kind="stable")
            xs = col[order]
            ys = y[order]
            boundaries = np.nonzero(xs[1:] > xs[:-1])[0]
            for b in boundaries:
                parts = [ys[: b + 1], ys[b + 1 :]]
                ratio, _ = gain_ratio(parent_h, parts, ds.n_classes)
                thr = float((xs[b] + xs[b + 1]) / 2.0)
                cand = (ratio, j, "numeric", thr, None)
                if better(cand, best):
                    best = cand
    return best


def _grow(ds: Dataset, min_leaf: int) -> _Node:
    node = _Node()
    node.counts = _counts(ds.y, ds.n_classes)
    node.label = int(np.argmax(node.counts))
    pure = (node.counts > 0).sum() <= 1
    if pure or len(ds) < min_leaf:
        return node
    best = _best_c45_split(ds)
    if best is None:
        return node
    _, j, kind, thr, present = best
    node.feature = j
    node.kind = kind
    node.threshold = thr
    col = ds.X[:, j]
    if kind == "categorical":
        # children ordered by the full category list so prediction can index
        cats = ds.features[j].categories
        node.children = []
        codes = col.astype(int)
        for c in range(len(cats)):
            sub = ds.subset(codes == c)
            if len(sub) == 0:
                child = _Node()
                child.counts = np.zeros(ds.n_classes)
                child.label = node.label
                node.children.append(child)
            else:
                node.children.append(_grow(sub, min_leaf))
    else:
        mask = col <= thr
        node.children = [_grow(ds.subset(mask), min_leaf), _grow(ds.subset(~mask), min_leaf)]
    return node


def _prune(node: _Node, confidence: float) -> float:
    """Prune bottom-up; returns the pessimistic error estimate of the
    (possibly collapsed) subtree."""
    n = node.counts.sum()
    errors_as_leaf = n - node.counts.max() if n > 0 else 0.0
    leaf_estimate = pessimistic_errors(errors_as_leaf, n, confidence)
    if node.is_leaf:
        return leaf_estimate
    subtree_estimate = sum(_prune(child, confidence) for child in node.children)
    if leaf_estimate <= subtree_estimate:
        node.children = None
        return leaf_estimate
    return subtree_estimate


class C45Model:
    def __init__(self, root: _Node, n_classes: int):
        self.root = root
        self.n_classes = n_classes

    @classmethod
    def fit(
        cls,
        ds: Dataset,
        pruning_confidence: float = 0.25,
        min_leaf: int = 2,
        prune: bool = True,
    ) -> "C45Model":
        if len(ds) == 0:
            raise ValueError("empty dataset")
        root = _grow(ds, min_leaf)
        if prune:
            _prune(root, pruning_confidence)
        return cls(root, ds.n_classes)

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X), dtype=int)

        def route(node: _Node, idx: np.ndarray) -> None:
            if len(idx) == 0:
                return
            if node.is_leaf:
                out[idx] = node.label
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

    def state_dict(self) -> dict:
        return {"n_classes": self.n_classes, "root": self.root.to_dict()}

    @classmethod
    def from_state(cls, state: dict) -> "C45Model":
        return cls(_Node.from_dict(state["root"]), state["n_classes"])
