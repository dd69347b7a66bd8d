"""Lloyd k-means and the nearest-center assignment shared by every module."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

THREADS_ENV = "CRCONDENSE_THREADS"
_CHUNK = 4096


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _sq_dists_block(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # explicit difference form: each entry depends only on its own point/center pair,
    # so results are bit-identical whatever the chunking or thread count
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def sq_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """N x M matrix of squared Euclidean distances."""
    points = np.asarray(points, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.float64)
    if points.ndim != 2 or centers.ndim != 2 or points.shape[1] != centers.shape[1]:
        raise ValueError(
            f"dimension mismatch: points {points.shape} vs centers {centers.shape}")
    n = points.shape[0]
    step = max(1, _CHUNK * 64 // max(centers.shape[0], 1))
    bounds = [(i, min(i + step, n)) for i in range(0, n, step)]
    out = np.empty((n, centers.shape[0]))
    threads = n_threads()

    def run(b):
        out[b[0]:b[1]] = _sq_dists_block(points[b[0]:b[1]], centers)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(run, bounds))
    else:
        for b in bounds:
            run(b)
    return out


def assign_nearest(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the nearest center per point, ties going to the lowest index."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[0] == 0:
        raise ValueError("need at least one center")
    # argmin returns the first minimum, which is the lowest-index tie-break
    return np.argmin(sq_distances(points, centers), axis=1)


@dataclass(frozen=True)
class KMeansConfig:
    k: int
    max_iter: int = 300
    tol: float = 1e-6
    seed: int = 0
    init: str = "plusplus"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.init not in ("plusplus", "random"):
            raise ValueError(f"unknown init {self.init!r}")


def _plusplus(points, k, rng):
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    closest = sq_distances(points, centers[0][None])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            # all remaining points coincide with chosen centers
            idx = int(rng.integers(n))
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(points[idx])
        closest = np.minimum(closest, sq_distances(points, points[idx][None])[:, 0])
    return np.array(centers)


def _centroids(points, assign, k):
    sums = np.zeros((k, points.shape[1]))
    # np.add.at accumulates in index order, keeping the reduction deterministic
    np.add.at(sums, assign, points)
    counts = np.bincount(assign, minlength=k)
    return sums, counts


def wcss(points: np.ndarray, centers: np.ndarray) -> float:
    """Within-cluster sum of squares under nearest-center assignment."""
    return float(sq_distances(points, centers).min(axis=1).sum())


def _repair_empty(points, centers, assign, counts):
    """Move each empty cluster to the point farthest from its nearest center."""
    for j in np.flatnonzero(counts == 0):
        d = sq_distances(points, centers)
        near = d[np.arange(len(points)), assign]
        # never steal the last point of another cluster
        donors = counts[assign] > 1
        if not donors.any():
            continue
        far = int(np.argmax(np.where(donors, near, -1.0)))
        counts[assign[far]] -= 1
        assign[far] = j
        counts[j] = 1
        centers[j] = points[far]
    return centers, assign, counts


def kmeans_fit(points: np.ndarray, cfg: KMeansConfig, history: list | None = None) -> np.ndarray:
    """Return ``cfg.k`` centers fitted to ``points`` with Lloyd iterations.

    If ``history`` is a list, the WCSS after every assignment/update cycle is
    appended to it.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("kmeans needs a non-empty 2-D point matrix")
    if cfg.k > points.shape[0]:
        raise ValueError(f"k={cfg.k} exceeds the number of points ({points.shape[0]})")
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    if cfg.init == "plusplus":
        centers = _plusplus(points, cfg.k, rng)
    else:
        centers = points[rng.choice(points.shape[0], cfg.k, replace=False)].copy()

    for _ in range(cfg.max_iter):
        assign = assign_nearest(points, centers)
        counts = np.bincount(assign, minlength=cfg.k)
        if (counts == 0).any():
            centers, assign, counts = _repair_empty(points, centers.copy(), assign, counts)
        sums, counts = _centroids(points, assign, cfg.k)
        new = np.where(counts[:, None] > 0, sums / np.maximum(counts, 1)[:, None], centers)
        shift = float(np.sqrt(((new - centers) ** 2).sum(axis=1)).sum())
        centers = new
        if history is not None:
            history.append(wcss(points, centers))
        if shift < cfg.tol:
            break
    return centers
