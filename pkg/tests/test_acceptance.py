"""Exit criteria. Run ``pytest tests/test_acceptance.py -v`` for the PASS/FAIL summary."""
import json
import time
from pathlib import Path

import numpy as np
import pytest
from threadpoolctl import threadpool_limits

import crcondense.condenser as cd
from conftest import brute_purity
from crcondense.benchmark import FAMILIES, PRESET_ORDER, make, run_benchmark
from crcondense.cli import main
from crcondense.condenser import (CondenseConfig, StepDiagnostics, activity_mask, condense,
                                  correctness, label_centers, overall_purity, purities, soft_assign)
from crcondense.data import CondensedModel, Dataset
from crcondense.evaluate import accuracy, mlp_init, nearest_crc_predict, TrainConfig
from crcondense.kmeans import KMeansConfig, assign_nearest, kmeans_fit, wcss

REFERENCE = json.loads((Path(__file__).parent / "data" / "reference_run.json").read_text())
ALL_PRESETS = [(f, p) for f in FAMILIES for p in PRESET_ORDER]
GAP_LIMIT = {"clear": 0.03, "touching": 0.05, "noisy": 0.07}


@pytest.mark.acceptance(1, "soft assignment weights over 10,000 configurations")
def test_soft_assignment_suite():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    checked = 0
    for _ in range(100):
        m, dim = int(rng.integers(2, 17)), int(rng.integers(1, 5))
        centers = rng.normal(size=(m, dim)) * rng.uniform(0.01, 100)
        points = rng.normal(size=(100, dim)) * rng.uniform(0.01, 100)
        s = soft_assign(points, centers)
        assert np.all(np.abs(s.first_weight + s.second_weight - 1) <= 1e-12)
        assert np.all((s.first_weight >= 0.5) & (s.first_weight <= 1))
        assert np.all((s.second_weight >= 0) & (s.second_weight <= 0.5))
        assert np.all(s.first_id != s.second_id)
        checked += len(points)
    # equidistant: points on the bisector of two mirrored centers, others far away
    a = rng.uniform(0.1, 5, 200)
    for ai, yi in zip(a, rng.normal(size=200)):
        C = np.array([[-ai, 0.0], [ai, 0.0], [100.0, 100.0]])
        s = soft_assign(np.array([[0.0, yi]]), C)
        assert (s.first_weight[0], s.second_weight[0]) == (0.5, 0.5)
    s = soft_assign(np.zeros((1, 2)), np.zeros((2, 2)))
    assert (s.first_weight[0], s.second_weight[0]) == (0.5, 0.5)
    assert checked == 10_000
    assert time.perf_counter() - start < 1.0


@pytest.mark.acceptance(2, "activity group is the XOR of the two correctness flags")
def test_activity_suite():
    from crcondense.data import SoftAssignment
    z = np.zeros(4)
    s = SoftAssignment(np.zeros(4, int), np.ones(4, int), z, z,
                       np.array([True, True, False, False]), np.array([True, False, True, False]))
    assert activity_mask(s).active.tolist() == [False, True, True, False]
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(1, 300))
        labels = rng.integers(0, 3, 6)
        y = rng.integers(0, 3, n)
        s = soft_assign(rng.normal(size=(n, 2)), rng.normal(size=(6, 2)))
        s = activity_mask(correctness(labels, s, y))
        for i in range(n):
            c1 = labels[s.first_id[i]] == y[i]
            c2 = labels[s.second_id[i]] == y[i]
            assert s.active[i] == ((c1 and not c2) or (c2 and not c1))


@pytest.mark.acceptance(3, "every accepted move strictly raised that center's isolated purity")
@pytest.mark.parametrize("family, preset", ALL_PRESETS)
def test_gating_suite(family, preset, monkeypatch):
    ds = make(family, preset, 2000, 7)
    original = cd.select_advance
    calls, moves = [], []

    def checked(ds_, model, candidates, diagnostics=None):
        diag = diagnostics if diagnostics is not None else StepDiagnostics()
        out = original(ds_, model, candidates, diag)
        baseline = purities(ds_, model).per_center
        for i in np.flatnonzero((out.centers != model.centers).any(axis=1)):
            isolated = model.centers.copy()
            isolated[i] = candidates[i]
            after = purities(ds_, CondensedModel(isolated, model.center_labels)).per_center[i]
            assert after > baseline[i], f"center {i}: {baseline[i]} -> {after}"
            moves.append(i)
        calls.append(1)
        return out

    monkeypatch.setattr(cd, "select_advance", checked)
    condense(ds, CondenseConfig((32, 32), seed=1))
    # also exercise the gate on configurations that have not converged yet
    for seed, k in enumerate((6, 2, 1)):
        condense(ds, CondenseConfig((k, k), seed=seed, max_iter=10))
    assert calls, "select_advance never ran"


@pytest.mark.acceptance(4, "best snapshot: purity = max(trace), len <= max_iter+1, >= init purity")
@pytest.mark.parametrize("family, preset", ALL_PRESETS)
@pytest.mark.parametrize("k, max_iter, patience", [(32, 100, 3), (8, 5, 1), (4, 2, 0), (16, 0, 3)])
def test_best_snapshot_suite(family, preset, k, max_iter, patience):
    ds = make(family, preset, 2000, 7)
    cfg = CondenseConfig((k, k), patience=patience, max_iter=max_iter, seed=2)
    model, hist = condense(ds, cfg)
    assert hist.best_purity == max(hist.purity_trace)
    assert len(hist.purity_trace) <= max_iter + 1
    assert hist.best_purity >= hist.purity_trace[0]
    assert overall_purity(ds, model) == hist.best_purity


@pytest.mark.acceptance(5, "nearest-CRC training accuracy equals overall purity (100 instances)")
def test_oracle_equivalence():
    rng = np.random.default_rng(99)
    for trial in range(100):
        n_classes = int(rng.integers(2, 5))
        n = int(rng.integers(n_classes * 4, 201))
        X = rng.normal(size=(n, 2)) + rng.integers(0, 3, (n, 1))
        y = np.concatenate([np.arange(n_classes), rng.integers(0, n_classes, n - n_classes)])
        ds = Dataset(X, y)
        if trial % 2:
            m = int(rng.integers(1, 17))
            C = rng.normal(size=(m, 2))
            model = CondensedModel(C, label_centers(ds, C))
        else:
            ks = [int(rng.integers(1, min(4, c) + 1)) for c in ds.class_counts()]
            model, _ = condense(ds, CondenseConfig(ks, seed=trial, max_iter=5))
            assert model.m <= 16
        acc = accuracy(nearest_crc_predict(model, X), y)
        assert acc == overall_purity(ds, model)
        assert acc == brute_purity(X.tolist(), y.tolist(), model.centers.tolist(), n_classes)[1]


@pytest.mark.acceptance(6, "k-means: WCSS non-increasing, centroid fixpoint, 8-point optimum")
def test_kmeans_suite():
    from test_kmeans import EIGHT, brute_force_best_2_partition
    rng = np.random.default_rng(3)
    for seed in range(10):
        pts = rng.normal(size=(300, 2)) * rng.uniform(0.5, 3, 2)
        hist = []
        k = int(rng.integers(2, 12))
        centers = kmeans_fit(pts, KMeansConfig(k, seed=seed), history=hist)
        assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))
        assign = assign_nearest(pts, centers)
        for j in range(k):
            np.testing.assert_allclose(centers[j], pts[assign == j].mean(axis=0), atol=1e-6)
    cost, lab = brute_force_best_2_partition(EIGHT)
    centers = kmeans_fit(EIGHT, KMeansConfig(2, seed=0))
    got = assign_nearest(EIGHT, centers)
    assert (got == lab).all() or (got == 1 - lab).all()
    assert wcss(EIGHT, centers) == pytest.approx(cost, rel=1e-12)


@pytest.mark.acceptance(7, "MLP backprop vs central differences, rel err < 1e-4")
def test_mlp_gradient_check():
    from test_evaluate import finite_difference_grads, max_relative_error
    rng = np.random.default_rng(17)
    model = mlp_init(2, 3, TrainConfig(hidden=8), rng)
    model.b1 = rng.normal(0, 0.5, 8)
    model.b2 = rng.normal(0, 0.5, 3)
    X, y = rng.normal(size=(16, 2)), rng.integers(0, 3, 16)
    _, analytic = model.loss_and_grads(X, y)
    numeric = finite_difference_grads(model, X, y, h=1e-6)
    worst = max(max_relative_error(a, b) for a, b in zip(analytic, numeric))
    assert worst < 1e-4


@pytest.fixture(scope="module")
def benchmark_runs():
    with threadpool_limits(1):
        return {(f, p): run_benchmark(f, p) for f, p in ALL_PRESETS}


@pytest.mark.acceptance(8, "condensed-trained MLP vs raw-trained MLP on six presets, < 30 s each")
@pytest.mark.parametrize("family, preset", ALL_PRESETS)
def test_end_to_end_regression(benchmark_runs, family, preset):
    r = benchmark_runs[family, preset]
    print(f"{family} {preset}: condensed={r['mlp_condensed_test_accuracy']:.4f} "
          f"raw={r['mlp_raw_test_accuracy']:.4f} gap={r['accuracy_gap']:+.4f} "
          f"time={r['seconds']['total']:.1f}s")
    if preset == "clear":
        assert r["mlp_condensed_test_accuracy"] >= 0.97
    assert abs(r["accuracy_gap"]) <= GAP_LIMIT[preset]
    assert r["seconds"]["total"] < 30.0
    assert r["m"] <= 64


def test_reference_run_is_reproduced(benchmark_runs):
    for ref in REFERENCE["runs"]:
        r = benchmark_runs[ref["family"], ref["preset"]]
        assert r["purity_trace"] == ref["purity_trace"]
        assert r["m"] == ref["m"]
        # MLP arithmetic may differ in the last bits across BLAS builds
        assert r["mlp_condensed_test_accuracy"] == pytest.approx(ref["mlp_condensed_test_accuracy"], abs=0.01)
        assert r["mlp_raw_test_accuracy"] == pytest.approx(ref["mlp_raw_test_accuracy"], abs=0.01)


@pytest.mark.acceptance(9, "identical seeds give byte-identical model, trace and SVG")
@pytest.mark.parametrize("family, preset", [("circles", "noisy"), ("moons", "touching")])
def test_determinism(tmp_path, family, preset):
    def pipeline():
        files = {}
        args = [
            ["generate", "--family", family, "--preset", preset, "--n", "2000", "--seed", "3", "--out", "d.csv"],
            ["condense", "--in", "d.csv", "--k-per-class", "32", "--seed", "5",
             "--out-model", "m.json", "--out-trace", "t.csv"],
            ["plot", "--data", "d.csv", "--model", "m.json", "--out", "p.svg"],
        ]
        for argv in args:
            argv = [str(tmp_path / a) if a.endswith((".csv", ".json", ".svg")) else a for a in argv]
            assert main(argv) == 0
        for name in ("d.csv", "m.json", "t.csv", "p.svg"):
            files[name] = (tmp_path / name).read_bytes()
            (tmp_path / name).unlink()
        return files

    first, second = pipeline(), pipeline()
    assert first == second
