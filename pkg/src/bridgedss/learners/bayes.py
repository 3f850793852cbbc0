"""Naive Bayes and Hidden Naive Bayes.

Naive Bayes: Laplace-smoothed frequency tables for categorical features,
per-class Gaussians with a variance floor for numerics.

Hidden Naive Bayes: every attribute gets a hidden parent mixing the other
attributes, weighted by conditional mutual information given the class.
Nominal features only.
"""

from __future__ import annotations

import numpy as np

from ..rules.dataset import Dataset

VARIANCE_FLOOR = 1e-6
_LOG_FLOOR = 1e-300


class NaiveBayesModel:
    def __init__(self):
        self.classes_: np.ndarray | None = None
        self.log_prior: np.ndarray | None = None
        self.feature_kinds: list[str] = []
        self.cat_log_tables: dict[int, np.ndarray] = {}  # (n_classes, n_values)
        self.gauss_mean: dict[int, np.ndarray] = {}
        self.gauss_var: dict[int, np.ndarray] = {}
        self.n_classes = 0

    @classmethod
    def fit(cls, ds: Dataset) -> "NaiveBayesModel":
        if len(ds) == 0:
            raise ValueError("empty dataset")
        m = cls()
        m.n_classes = ds.n_classes
        m.feature_kinds = [f.kind for f in ds.features]
        counts = np.bincount(ds.y, minlength=ds.n_classes).astype(float)
        with np.errstate(divide="ignore"):
            m.log_prior = np.log(np.maximum(counts / len(ds), _LOG_FLOOR))
        present = counts > 0
        for j, f in enumerate(ds.features):
            col = ds.X[:, j]
            if f.kind == "categorical":
                v = len(f.categories)
                table = np.ones((ds.n_classes, v))  # Laplace add-one
                codes = col.astype(int)
                np.add.at(table, (ds.y, codes), 1.0)
                table /= table.sum(axis=1, keepdims=True)
                m.cat_log_tables[j] = np.log(table)
            else:
                mean = np.zeros(ds.n_classes)
                var = np.full(ds.n_classes, VARIANCE_FLOOR)
                for c in range(ds.n_classes):
                    vals = col[ds.y == c]
                    if len(vals):
                        mean[c] = vals.mean()
                        var[c] = max(vals.var(), VARIANCE_FLOOR)
                m.gauss_mean[j] = mean
                m.gauss_var[j] = var
        # classes never seen keep -inf-ish prior so they are never predicted
        m.log_prior[~present] = np.log(_LOG_FLOOR)
        return m

    def log_posterior(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        scores = np.tile(self.log_prior, (len(X), 1))
        for j, kind in enumerate(self.feature_kinds):
            col = X[:, j]
            if kind == "categorical":
                table = self.cat_log_tables[j]
                codes = np.clip(col.astype(int), 0, table.shape[1] - 1)
                scores += table[:, codes].T
            else:
                mean = self.gauss_mean[j]
                var = self.gauss_var[j]
                diff = col[:, None] - mean[None, :]
                scores += -0.5 * (np.log(2 * np.pi * var)[None, :] + diff * diff / var[None, :])
        return scores

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.log_posterior(X), axis=1)

    def state_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "log_prior": self.log_prior.tolist(),
            "feature_kinds": self.feature_kinds,
            "cat_log_tables": {str(j): t.tolist() for j, t in self.cat_log_tables.items()},
            "gauss_mean": {str(j): t.tolist() for j, t in self.gauss_mean.items()},
            "gauss_var": {str(j): t.tolist() for j, t in self.gauss_var.items()},
        }

    @classmethod
    def from_state(cls, state: dict) -> "NaiveBayesModel":
        m = cls()
        m.n_classes = state["n_classes"]
        m.log_prior = np.asarray(state["log_prior"])
        m.feature_kinds = list(state["feature_kinds"])
        m.cat_log_tables = {int(j): np.asarray(t) for j, t in state["cat_log_tables"].items()}
        m.gauss_mean = {int(j): np.asarray(t) for j, t in state["gauss_mean"].items()}
        m.gauss_var = {int(j): np.asarray(t) for j, t in state["gauss_var"].items()}
        return m


def conditional_mutual_information(
    xi: np.ndarray, xj: np.ndarray, y: np.ndarray, vi: int, vj: int, n_classes: int
) -> float:
    """I(Xi; Xj | Y) from empirical frequencies, natural log, zeros skipped."""
    n = len(y)
    joint = np.zeros((vi, vj, n_classes))
    np.add.at(joint, (xi, xj, y), 1.0)
    joint /= n
    p_c = joint.sum(axis=(0, 1))
    p_ic = joint.sum(axis=1)  # (vi, C)
    p_jc = joint.sum(axis=0)  # (vj, C)
    cmi = 0.0
    nz = np.argwhere(joint > 0)
    for a, b, c in nz:
        p_abc = joint[a, b, c]
        cmi += p_abc * np.log(p_abc * p_c[c] / (p_ic[a, c] * p_jc[b, c]))
    return float(max(cmi, 0.0))


class HnbModel:
    def __init__(self):
        self.n_classes = 0
        self.n_features = 0
        self.cardinalities: list[int] = []
        self.log_prior: np.ndarray | None = None
        self.weights: np.ndarray | None = None  # (F, F) rows sum to 1, diag 0
        self.cond: dict[tuple[int, int], np.ndarray] = {}  # (vi, vj, C)

    @classmethod
    def fit(cls, ds: Dataset) -> "HnbModel":
        if len(ds) == 0:
            raise ValueError("empty dataset")
        if any(f.kind != "categorical" for f in ds.features):
            raise ValueError(
                "hidden naive bayes requires all-nominal features; apply the discrete filter"
            )
        m = cls()
        m.n_classes = ds.n_classes
        m.n_features = len(ds.features)
        m.cardinalities = [len(f.categories) for f in ds.features]
        codes = ds.X.astype(int)
        y = ds.y
        n = len(ds)
        counts = np.bincount(y, minlength=ds.n_classes).astype(float)
        m.log_prior = np.log((counts + 1.0) / (n + ds.n_classes))

        F = m.n_features
        cmi = np.zeros((F, F))
        for i in range(F):
            for j in range(F):
                if i == j:
                    continue
                cmi[i, j] = conditional_mutual_information(
                    codes[:, i], codes[:, j], y, m.cardinalities[i], m.cardinalities[j], ds.n_classes
                )
        weights = cmi.copy()
        row_sums = weights.sum(axis=1, keepdims=True)
        uniform = np.full((F, F), 1.0 / (F - 1)) if F > 1 else np.zeros((F, F))
        np.fill_diagonal(uniform, 0.0)
        weights = np.where(row_sums > 0, weights / np.where(row_sums > 0, row_sums, 1.0), uniform)
        m.weights = weights

        # Laplace-smoothed P(a_i | a_j, c)
        for i in range(F):
            for j in range(F):
                if i == j:
                    continue
                vi, vj = m.cardinalities[i], m.cardinalities[j]
                table = np.ones((vi, vj, ds.n_classes))
                np.add.at(table, (codes[:, i], codes[:, j], y), 1.0)
                table /= table.sum(axis=0, keepdims=True)
                m.cond[(i, j)] = table
        return m

    def log_posterior(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X).astype(int)
        n = len(X)
        F = self.n_features
        scores = np.tile(self.log_prior, (n, 1))
        for i in range(F):
            mixed = np.zeros((n, self.n_classes))
            xi = np.clip(X[:, i], 0, self.cardinalities[i] - 1)
            for j in range(F):
                if i == j or self.weights[i, j] == 0.0:
                    continue
                xj = np.clip(X[:, j], 0, self.cardinalities[j] - 1)
                mixed += self.weights[i, j] * self.cond[(i, j)][xi, xj, :]
            if F > 1:
                scores += np.log(np.maximum(mixed, _LOG_FLOOR))
        return scores

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.log_posterior(X), axis=1)

    def state_dict(self) -> dict:
        return {
            "n_classes": self.n_classes,
            "n_features": self.n_features,
            "cardinalities": self.cardinalities,
            "log_prior": self.log_prior.tolist(),
            "weights": self.weights.tolist(),
            "cond": {f"{i},{j}": t.tolist() for (i, j), t in self.cond.items()},
        }

    @classmethod
    def from_state(cls, state: dict) -> "HnbModel":
        m = cls()
        m.n_classes = state["n_classes"]
        m.n_features = state["n_features"]
        m.cardinalities = list(state["cardinalities"])
        m.log_prior = np.asarray(state["log_prior"])
        m.weights = np.asarray(state["weights"])
        m.cond = {
            tuple(int(v) for v in k.split(",")): np.asarray(t)
            for k, t in state["cond"].items()
        }
        return m
