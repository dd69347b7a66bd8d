"""CSV datasets, JSON model files, trace CSVs and run manifests."""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .data import CondensedModel, Dataset

MODEL_FORMAT_VERSION = 1
_INT = re.compile(r"[+-]?\d+\Z")


class FormatError(ValueError):
    """Malformed input file; message carries the path and line number."""


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips a float64
    return repr(float(v))


def dataset_to_csv(ds: Dataset) -> str:
    head = ",".join([f"x{j}" for j in range(ds.dim)] + ["label"])
    rows = [",".join([_fmt(v) for v in row] + [str(int(lab))])
            for row, lab in zip(ds.instances, ds.labels)]
    return "\n".join([head] + rows) + "\n"


def write_csv(ds: Dataset, path) -> None:
    Path(path).write_bytes(dataset_to_csv(ds).encode("utf-8"))


def read_csv(path, label_names: tuple[str, ...] | None = None) -> Dataset:
    """Parse a dataset CSV.

    Integer labels are used as-is. Any other label text is mapped to dense
    ids in sorted order, recorded in ``Dataset.label_names``. Passing
    ``label_names`` fixes the mapping and rejects labels outside it.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"{path}: cannot read ({e.strerror or e})") from e
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}:1: missing header")
    header = [h.strip() for h in lines[0].split(",")]
    if len(header) < 2 or header[-1] != "label":
        raise FormatError(f"{path}:1: header must be x0,...,x{{D-1}},label")
    dim = len(header) - 1
    feats, raw = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != dim + 1:
            raise FormatError(f"{path}:{lineno}: expected {dim + 1} fields, got {len(cells)}")
        try:
            row = [float(c) for c in cells[:-1]]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-numeric feature") from None
        if not all(np.isfinite(row)):
            raise FormatError(f"{path}:{lineno}: non-finite feature")
        lab = cells[-1].strip()
        if not lab:
            raise FormatError(f"{path}:{lineno}: unknown label ''")
        feats.append(row)
        raw.append((lineno, lab))

    X = np.array(feats, dtype=np.float64).reshape(len(feats), dim)
    if label_names is not None:
        index = {name: i for i, name in enumerate(label_names)}
        y = []
        for lineno, lab in raw:
            if lab not in index:
                raise FormatError(f"{path}:{lineno}: unknown label {lab!r}")
            y.append(index[lab])
        return Dataset(X, np.array(y, np.int64), n_classes=len(label_names), label_names=tuple(label_names))
    if all(_INT.match(lab) for _, lab in raw):
        y = []
        for lineno, lab in raw:
            if int(lab) < 0:
                raise FormatError(f"{path}:{lineno}: unknown label {lab!r} (labels must be >= 0)")
            y.append(int(lab))
        return Dataset(X, np.array(y, np.int64))
    names = tuple(sorted({lab for _, lab in raw}))
    index = {name: i for i, name in enumerate(names)}
    return Dataset(X, np.array([index[lab] for _, lab in raw], np.int64), label_names=names)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_model(model: CondensedModel, path, *, n_classes: int, seed: int, best_purity: float,
                config: dict, label_names=None) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "dim": model.dim,
        "m": model.m,
        "n_classes": int(n_classes),
        "centers": [[float(v) for v in row] for row in model.centers],
        "labels": [int(v) for v in model.center_labels],
        "k_per_class": list(model.k_per_class),
        "seed": int(seed),
        "best_purity": float(best_purity),
        "config": config,
        "label_names": list(label_names) if label_names is not None else None,
    }
    Path(path).write_bytes(dumps_json(doc).encode("utf-8"))


def read_model(path) -> tuple[CondensedModel, dict]:
    """Load a model file; returns the model and the full document."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FormatError(f"{path}: model file not found") from None
    except OSError as e:
        raise FormatError(f"{path}: cannot read ({e.strerror or e})") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}:{e.lineno}: invalid model file ({e.msg})") from None
    try:
        if doc["format_version"] != MODEL_FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported model format version {doc['format_version']}")
        centers = np.array(doc["centers"], dtype=np.float64).reshape(int(doc["m"]), int(doc["dim"]))
        model = CondensedModel(centers, np.array(doc["labels"], np.int64), tuple(doc["k_per_class"]))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, FormatError):
            raise
        raise FormatError(f"{path}: malformed model file ({e})") from None
    return model, doc


def trace_to_csv(trace) -> str:
    rows = ["iteration,overall_purity"] + [f"{i},{_fmt(p)}" for i, p in enumerate(trace)]
    return "\n".join(rows) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_bytes(text.encode("utf-8"))
