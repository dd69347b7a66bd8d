"""Seeded circles/moons generators.

Randomness comes from numpy's PCG64 bit generator (``np.random.Generator``),
whose output stream for a given seed is fixed across platforms.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

PRESETS = {"clear": 0.02, "touching": 0.08, "noisy": 0.15}


@dataclass(frozen=True)
class NoiseSpec:
    std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.std) or self.std < 0:
            raise ValueError(f"noise std must be finite and >= 0, got {self.std}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    @classmethod
    def preset(cls, name: str, seed: int = 0) -> "NoiseSpec":
        try:
            return cls(PRESETS[name], seed)
        except KeyError:
            raise ValueError(f"unknown noise preset {name!r}; expected one of {sorted(PRESETS)}") from None


def _check_n(n: int) -> tuple[int, int]:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return (n + 1) // 2, n // 2


def _finish(X0: np.ndarray, X1: np.ndarray, noise: NoiseSpec) -> Dataset:
    X = np.vstack([X0, X1]).reshape(-1, 2)
    y = np.concatenate([np.zeros(len(X0), np.int64), np.ones(len(X1), np.int64)])
    if noise.std > 0:
        rng = np.random.Generator(np.random.PCG64(noise.seed))
        X = X + rng.normal(0.0, noise.std, size=X.shape)
    return Dataset(X, y, n_classes=2)


def make_circles(n: int, noise: NoiseSpec = NoiseSpec(), factor: float = 0.5) -> Dataset:
    """Outer unit circle (label 0) around an inner circle of radius ``factor`` (label 1)."""
    if not 0 < factor < 1:
        raise ValueError(f"factor must lie in (0, 1), got {factor}")
    n0, n1 = _check_n(n)
    t0 = 2 * np.pi * np.arange(n0) / max(n0, 1)
    t1 = 2 * np.pi * np.arange(n1) / max(n1, 1)
    outer = np.column_stack([np.cos(t0), np.sin(t0)])
    inner = factor * np.column_stack([np.cos(t1), np.sin(t1)])
    return _finish(outer, inner, noise)


def make_moons(n: int, noise: NoiseSpec = NoiseSpec()) -> Dataset:
    """Two interleaving half circles."""
    n0, n1 = _check_n(n)
    t0 = np.linspace(0, np.pi, n0)
    t1 = np.linspace(0, np.pi, n1)
    upper = np.column_stack([np.cos(t0), np.sin(t0)])
    lower = np.column_stack([1 - np.cos(t1), 1 - np.sin(t1) - 0.5])
    return _finish(upper, lower, noise)
