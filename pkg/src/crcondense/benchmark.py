"""Seeded condense-then-train benchmark on the synthetic presets."""
from __future__ import annotations

import time

from .condenser import CondenseConfig, condense
from .data import Dataset
from .evaluate import TrainConfig, accuracy, mlp_predict, mlp_train, nearest_crc_predict
from .synth import NoiseSpec, make_circles, make_moons

FAMILIES = ("circles", "moons")
PRESET_ORDER = ("clear", "touching", "noisy")


def make(family: str, preset: str, n: int, seed: int) -> Dataset:
    noise = NoiseSpec.preset(preset, seed)
    if family == "circles":
        return make_circles(n, noise)
    if family == "moons":
        return make_moons(n, noise)
    raise ValueError(f"unknown family {family!r}")


def run_benchmark(family: str, preset: str, n: int = 2000, k: int = 32, data_seed: int = 7,
                  test_seed: int = 1007, condense_seed: int = 1,
                  train_cfg: TrainConfig = TrainConfig()) -> dict:
    """Condense a training draw, train MLPs on CRCs and on raw data, score on a fresh draw."""
    t0 = time.perf_counter()
    train = make(family, preset, n, data_seed)
    test = make(family, preset, n, test_seed)
    model, hist = condense(train, CondenseConfig((k,) * train.n_classes, seed=condense_seed))
    t1 = time.perf_counter()
    crcs = Dataset(model.centers, model.center_labels, n_classes=train.n_classes)
    acc_condensed = accuracy(mlp_predict(mlp_train(crcs, train_cfg), test.instances), test.labels)
    t2 = time.perf_counter()
    acc_raw = accuracy(mlp_predict(mlp_train(train, train_cfg), test.instances), test.labels)
    t3 = time.perf_counter()
    return {
        "family": family, "preset": preset, "n": n, "k_per_class": k,
        "m": model.m,
        "purity_trace": list(hist.purity_trace),
        "best_purity": hist.best_purity,
        "nearest_crc_test_accuracy": accuracy(nearest_crc_predict(model, test.instances), test.labels),
        "mlp_condensed_test_accuracy": acc_condensed,
        "mlp_raw_test_accuracy": acc_raw,
        "accuracy_gap": acc_condensed - acc_raw,
        "seconds": {"condense": t1 - t0, "mlp_condensed": t2 - t1, "mlp_raw": t3 - t2, "total": t3 - t0},
    }
