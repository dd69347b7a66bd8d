"""Dataset and condensed-model value types."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """N instances of dimension D with dense integer labels 0..n_classes-1.

    ``n_classes`` defaults to ``1 + max(labels)``; pass it explicitly to keep
    trailing empty classes (e.g. a test split that lacks the last class).
    """

    instances: np.ndarray
    labels: np.ndarray
    n_classes: int = -1
    label_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        X = np.array(self.instances, dtype=np.float64, copy=True)
        y = np.array(self.labels, copy=True)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, max(X.shape[0], 1))
        if X.ndim != 2:
            raise ValueError(f"instances must be a 2-D matrix, got shape {X.shape}")
        if X.shape[1] < 1:
            raise ValueError("instances need at least one feature column")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError(
                f"labels length {y.shape} does not match {X.shape[0]} instances")
        if y.size and not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.mod(y, 1) == 0):
                raise ValueError("labels must be integers")
        y = y.astype(np.int64)
        if y.size and y.min() < 0:
            raise ValueError("labels must be non-negative")
        if not np.all(np.isfinite(X)):
            raise ValueError("instances contain non-finite values")
        n = int(y.max()) + 1 if y.size else 0
        if self.n_classes >= 0:
            if n > self.n_classes:
                raise ValueError(f"label {n - 1} out of range for {self.n_classes} classes")
            n = self.n_classes
        object.__setattr__(self, "instances", _frozen(X))
        object.__setattr__(self, "labels", _frozen(y))
        object.__setattr__(self, "n_classes", n)

    @property
    def n(self) -> int:
        return self.instances.shape[0]

    @property
    def dim(self) -> int:
        return self.instances.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


@dataclass(frozen=True)
class CondensedModel:
    """M labeled centers; doubles as a nearest-center (piecewise-linear) classifier."""

    centers: np.ndarray
    center_labels: np.ndarray
    k_per_class: tuple[int, ...] = ()

    def __post_init__(self):
        C = np.array(self.centers, dtype=np.float64, copy=True)
        lab = np.array(self.center_labels, dtype=np.int64, copy=True)
        if C.ndim != 2:
            raise ValueError(f"centers must be a 2-D matrix, got shape {C.shape}")
        if lab.ndim != 1 or lab.shape[0] != C.shape[0]:
            raise ValueError("center_labels length must equal the number of centers")
        if not np.all(np.isfinite(C)):
            raise ValueError("centers contain non-finite values")
        if lab.size and lab.min() < 0:
            raise ValueError("center labels must be non-negative")
        object.__setattr__(self, "centers", _frozen(C))
        object.__setattr__(self, "center_labels", _frozen(lab))
        object.__setattr__(self, "k_per_class", tuple(int(k) for k in self.k_per_class))

    @property
    def m(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]

    def with_centers(self, centers: np.ndarray, labels: np.ndarray) -> "CondensedModel":
        return CondensedModel(centers, labels, self.k_per_class)


@dataclass
class SoftAssignment:
    """Two-nearest-center assignment of every instance.

    Correctness and activity flags stay ``None`` until filled by
    :func:`crcondense.condenser.correctness` and
    :func:`crcondense.condenser.activity_mask`.
    """

    first_id: np.ndarray
    second_id: np.ndarray
    first_weight: np.ndarray
    second_weight: np.ndarray
    first_correct: np.ndarray | None = None
    second_correct: np.ndarray | None = None
    active: np.ndarray | None = None


@dataclass(frozen=True)
class RefinementHistory:
    purity_trace: tuple[float, ...]
    best_iteration: int
    best_purity: float

    @classmethod
    def from_trace(cls, trace) -> "RefinementHistory":
        trace = tuple(float(p) for p in trace)
        if not trace:
            raise ValueError("empty purity trace")
        best = max(trace)
        return cls(trace, trace.index(best), best)


def class_partition(ds: Dataset) -> list[np.ndarray]:
    """Index arrays of the instances of each class, in class order."""
    return [np.flatnonzero(ds.labels == c) for c in range(ds.n_classes)]
