"""Downstream checks: nearest-CRC classification and a small numpy MLP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import CondensedModel, Dataset
from .kmeans import assign_nearest


def nearest_crc_predict(model: CondensedModel, points: np.ndarray) -> np.ndarray:
    if model.m == 0:
        raise ValueError("cannot predict with an empty model")
    return model.center_labels[assign_nearest(points, model.centers)]


def accuracy(predicted, truth) -> float:
    predicted, truth = np.asarray(predicted), np.asarray(truth)
    if predicted.shape != truth.shape or predicted.size == 0:
        raise ValueError("accuracy needs two non-empty vectors of equal length")
    return float(np.mean(predicted == truth))


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 64
    epochs: int = 200
    batch_size: int = 32
    lr: float = 5e-2
    momentum: float = 0.9
    seed: int = 0
    standardize: bool = True

    def __post_init__(self):
        if self.hidden < 1 or self.batch_size < 1 or self.lr <= 0:
            raise ValueError("hidden, batch_size and lr must be positive")
        if self.epochs < 0 or not 0 <= self.momentum < 1:
            raise ValueError("epochs must be >= 0 and momentum in [0, 1)")


@dataclass
class MLPModel:
    """D -> H (tanh) -> n_classes (softmax); inputs are standardized with mean/std."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    @property
    def params(self):
        return [self.W1, self.b1, self.W2, self.b2]

    def copy(self) -> "MLPModel":
        return MLPModel(*(a.copy() for a in (self.W1, self.b1, self.W2, self.b2, self.mean, self.std)))

    def _hidden(self, X):
        return np.tanh(((X - self.mean) / self.std) @ self.W1 + self.b1)

    def logits(self, X: np.ndarray) -> np.ndarray:
        return self._hidden(np.asarray(X, dtype=np.float64)) @ self.W2 + self.b2

    def proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.logits(X))

    def loss_and_grads(self, X: np.ndarray, y: np.ndarray):
        """Mean cross-entropy over the batch and its gradients w.r.t. (W1, b1, W2, b2)."""
        Z = (X - self.mean) / self.std
        H = np.tanh(Z @ self.W1 + self.b1)
        P = softmax(H @ self.W2 + self.b2)
        n = X.shape[0]
        rows = np.arange(n)
        loss = -np.mean(np.log(np.maximum(P[rows, y], 1e-300)))
        G = P.copy()
        G[rows, y] -= 1.0
        G /= n
        gW2 = H.T @ G
        gb2 = G.sum(axis=0)
        GH = (G @ self.W2.T) * (1.0 - H ** 2)
        gW1 = Z.T @ GH
        gb1 = GH.sum(axis=0)
        return loss, [gW1, gb1, gW2, gb2]


def mlp_init(dim: int, n_classes: int, cfg: TrainConfig, rng: np.random.Generator) -> MLPModel:
    # Glorot-uniform weights, zero biases
    def glorot(fan_in, fan_out):
        lim = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-lim, lim, size=(fan_in, fan_out))

    return MLPModel(glorot(dim, cfg.hidden), np.zeros(cfg.hidden),
                    glorot(cfg.hidden, n_classes), np.zeros(n_classes),
                    np.zeros(dim), np.ones(dim))


def mlp_train(train: Dataset, cfg: TrainConfig = TrainConfig()) -> MLPModel:
    """Minibatch SGD with momentum on mean cross-entropy; deterministic per seed."""
    if train.n == 0:
        raise ValueError("empty training set")
    if np.count_nonzero(train.class_counts()) < 2:
        raise ValueError("training set must contain at least two classes")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    model = mlp_init(train.dim, train.n_classes, cfg, rng)
    X, y = train.instances, train.labels
    if cfg.standardize:
        model.mean = X.mean(axis=0)
        std = X.std(axis=0)
        model.std = np.where(std > 0, std, 1.0)
    velocity = [np.zeros_like(p) for p in model.params]
    for _ in range(cfg.epochs):
        perm = rng.permutation(train.n)
        for start in range(0, train.n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            _, grads = model.loss_and_grads(X[idx], y[idx])
            for p, v, g in zip(model.params, velocity, grads):
                v *= cfg.momentum
                v -= cfg.lr * g
                p += v
    return model


def mlp_loss(model: MLPModel, ds: Dataset) -> float:
    return float(model.loss_and_grads(ds.instances, ds.labels)[0])


def mlp_predict(model: MLPModel, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != model.W1.shape[0]:
        raise ValueError(f"expected points of dimension {model.W1.shape[0]}, got shape {points.shape}")
    return np.argmax(model.logits(points), axis=1)
