import numpy as np
import pytest

from crcondense.data import Dataset
from crcondense.synth import NoiseSpec, make_circles, make_moons


def brute_purity(X, y, centers, n_classes):
    """Plain-loop per-center purity and overall purity (independent oracle)."""
    m = len(centers)
    counts = [[0] * n_classes for _ in range(m)]
    for x, lab in zip(X, y):
        best, bestd = 0, None
        for j, c in enumerate(centers):
            d = sum((a - b) ** 2 for a, b in zip(x, c))
            if bestd is None or d < bestd:
                best, bestd = j, d
        counts[best][lab] += 1
    per = [max(row) / sum(row) if sum(row) else 0.0 for row in counts]
    overall = sum(max(row) for row in counts) / len(X)
    return per, overall, counts


@pytest.fixture
def two_blobs():
    rng = np.random.Generator(np.random.PCG64(0))
    a = rng.normal([0, 0], 0.1, size=(20, 2))
    b = rng.normal([5, 5], 0.1, size=(20, 2))
    return Dataset(np.vstack([a, b]), np.repeat([0, 1], 20))


def preset_dataset(family, preset, n=2000, seed=7):
    noise = NoiseSpec.preset(preset, seed)
    return make_circles(n, noise) if family == "circles" else make_moons(n, noise)


# -- acceptance reporting: one PASS/FAIL line per numbered criterion ----------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    failed = rep.failed or (rep.when == "setup" and rep.skipped)
    prev = _ACCEPTANCE.get(number, (title, True))
    if rep.when == "call" or failed:
        _ACCEPTANCE[number] = (title, prev[1] and not failed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
