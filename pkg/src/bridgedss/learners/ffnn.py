"""Single-hidden-layer feed-forward network: sigmoid hidden units, softmax
output, cross-entropy loss, seeded shuffled mini-batch SGD with momentum."""

from __future__ import annotations

import numpy as np

from ..rules.dataset import Dataset
from .base import encode_features


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=1, keepdims=True)


class FfnnModel:
    def __init__(self, w1, b1, w2, b2, n_classes: int):
        self.w1 = w1
        self.b1 = b1
        self.w2 = w2
        self.b2 = b2
        self.n_classes = n_classes
        self.features = None
        self.loss_history: list[float] = []

    @staticmethod
    def init_params(n_in: int, hidden: int, n_out: int, rng: np.random.Generator):
        scale1 = 1.0 / np.sqrt(n_in)
        scale2 = 1.0 / np.sqrt(hidden)
        return (
            rng.uniform(-scale1, scale1, (n_in, hidden)),
            np.zeros(hidden),
            rng.uniform(-scale2, scale2, (hidden, n_out)),
            np.zeros(n_out),
        )

    @classmethod
    def fit(
        cls,
        ds: Dataset,
        hidden: int | None = None,
        epochs: int = 100,
        lr: float = 0.3,
        momentum: float = 0.2,
        batch_size: int = 32,
        seed: int = 7,
    ) -> "FfnnModel":
        if len(ds) == 0:
            raise ValueError("empty dataset")
        X = encode_features(ds.features, ds.X)
        n, n_in = X.shape
        n_out = ds.n_classes
        if hidden is None:
            hidden = max(2, (n_in + n_out) // 2)
        rng = np.random.default_rng(seed)
        w1, b1, w2, b2 = cls.init_params(n_in, hidden, n_out, rng)
        v = [np.zeros_like(p) for p in (w1, b1, w2, b2)]
        onehot = np.zeros((n, n_out))
        onehot[np.arange(n), ds.y] = 1.0
        model = cls(w1, b1, w2, b2, n_out)
        model.features = ds.features
        for _ in range(epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for lo in range(0, n, batch_size):
                idx = order[lo : lo + batch_size]
                xb, tb = X[idx], onehot[idx]
                h = sigmoid(xb @ w1 + b1)
                p = softmax(h @ w2 + b2)
                epoch_loss += float(
                    -(tb * np.log(np.maximum(p, 1e-300))).sum()
                )
                grads = cls._gradients(xb, tb, h, p, w2)
                for k, (param, g) in enumerate(zip((w1, b1, w2, b2), grads)):
                    v[k] = momentum * v[k] - lr * g
                    param += v[k]
            model.loss_history.append(epoch_loss / n)
        return model

    @staticmethod
    def _gradients(xb, tb, h, p, w2):
        """Cross-entropy gradients, averaged over the batch."""
        m = len(xb)
        delta_out = (p - tb) / m
        g_w2 = h.T @ delta_out
        g_b2 = delta_out.sum(axis=0)
        delta_h = (delta_out @ w2.T) * h * (1.0 - h)
        g_w1 = xb.T @ delta_h
        g_b1 = delta_h.sum(axis=0)
        return g_w1, g_b1, g_w2, g_b2

    def forward(self, X_enc: np.ndarray) -> np.ndarray:
        h = sigmoid(X_enc @ self.w1 + self.b1)
        return softmax(h @ self.w2 + self.b2)

    def predict(self, X: np.ndarray) -> np.ndarray:
        X_enc = encode_features(self.features, np.atleast_2d(X))
        return np.argmax(self.forward(X_enc), axis=1)

    def loss(self, X_enc: np.ndarray, y: np.ndarray) -> float:
        p = self.forward(X_enc)
        return float(-np.log(np.maximum(p[np.arange(len(y)), y], 1e-300)).mean())

    def state_dict(self) -> dict:
        from ..rules.dataset import Feature

        return {
            "w1": self.w1.tolist(),
            "b1": self.b1.tolist(),
            "w2": self.w2.tolist(),
            "b2": self.b2.tolist(),
            "n_classes": self.n_classes,
            "features": [f.as_dict() for f in self.features],
        }

    @classmethod
    def from_state(cls, state: dict) -> "FfnnModel":
        from ..rules.dataset import Feature

        model = cls(
            np.asarray(state["w1"]),
            np.asarray(state["b1"]),
            np.asarray(state["w2"]),
            np.asarray(state["b2"]),
            state["n_classes"],
        )
        model.features = tuple(Feature.from_dict(d) for d in state["features"])
        return model
