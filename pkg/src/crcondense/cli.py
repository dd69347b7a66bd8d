"""``crcondense`` command line: generate, condense, evaluate, plot."""
from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .condenser import CondenseConfig, condense, overall_purity
from .data import Dataset
from .evaluate import TrainConfig, accuracy, mlp_predict, mlp_train, nearest_crc_predict
from .io import (FormatError, dataset_to_csv, dumps_json, read_csv, read_model, trace_to_csv,
                 write_model, write_text)
from .kmeans import THREADS_ENV, n_threads
from .plot import render_svg
from .synth import PRESETS, NoiseSpec, make_circles, make_moons

log = logging.getLogger("crcondense")


class CLIError(Exception):
    pass


def manifest_path(out) -> Path:
    return Path(str(out) + ".manifest.json")


def _write_manifest(args, out, timings, metrics, inputs=(), outputs=()):
    config = {k: v for k, v in vars(args).items() if k not in ("func", "verbose", "replay")}
    doc = {
        "tool": "crcondense",
        "version": __version__,
        "subcommand": args.command,
        "config": config,
        "seeds": {k: v for k, v in config.items() if k.endswith("seed")},
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
        "metrics": metrics,
        "threads": n_threads(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    write_text(manifest_path(out), dumps_json(doc))


def _write(path, text):
    try:
        write_text(path, text)
    except OSError as e:
        raise CLIError(f"{path}: cannot write ({e.strerror or e})") from None


def _parse_k(spec: str, n_classes: int) -> tuple[int, ...]:
    try:
        ks = tuple(int(v) for v in spec.split(","))
    except ValueError:
        raise CLIError(f"--k-per-class must be an integer or comma list, got {spec!r}") from None
    if len(ks) == 1:
        ks = ks * n_classes
    if len(ks) != n_classes:
        raise CLIError(f"--k-per-class lists {len(ks)} values for {n_classes} classes")
    return ks


def cmd_generate(args):
    t0 = time.perf_counter()
    std = PRESETS[args.preset] if args.noise_std is None else args.noise_std
    noise = NoiseSpec(std, args.seed)
    if args.family == "circles":
        ds = make_circles(args.n, noise, args.factor)
    else:
        ds = make_moons(args.n, noise)
    if ds.n == 0:
        ds = Dataset(np.empty((0, 2)), np.empty(0, np.int64))
    _write(args.out, dataset_to_csv(ds))
    _write_manifest(args, args.out, {"generate": time.perf_counter() - t0},
                    {"n": ds.n, "noise_std": std, "class_counts": ds.class_counts().tolist()},
                    outputs=[args.out])


def cmd_condense(args):
    t0 = time.perf_counter()
    ds = read_csv(args.input)
    t1 = time.perf_counter()
    if ds.n == 0:
        raise CLIError(f"{args.input}: dataset is empty")
    cfg = CondenseConfig(_parse_k(args.k_per_class, ds.n_classes), args.step_scale,
                         args.patience, args.max_iter, args.seed)
    model, hist = condense(ds, cfg)
    t2 = time.perf_counter()
    write_model(model, args.out_model, n_classes=ds.n_classes, seed=args.seed,
                best_purity=hist.best_purity, label_names=ds.label_names,
                config={"k_per_class": list(cfg.k_per_class), "step_scale": cfg.step_scale,
                        "patience": cfg.patience, "max_iter": cfg.max_iter, "seed": cfg.seed,
                        "input": str(args.input)})
    _write(args.out_trace, trace_to_csv(hist.purity_trace))
    _write_manifest(args, args.out_model,
                    {"read": t1 - t0, "condense": t2 - t1, "write": time.perf_counter() - t2},
                    {"n": ds.n, "m": model.m, "best_purity": hist.best_purity,
                     "best_iteration": hist.best_iteration, "iterations": len(hist.purity_trace) - 1},
                    inputs=[args.input], outputs=[args.out_model, args.out_trace])


def cmd_evaluate(args):
    t0 = time.perf_counter()
    model, doc = read_model(args.model)
    names = tuple(doc["label_names"]) if doc.get("label_names") else None
    train = read_csv(args.data, names)
    test = read_csv(args.test, names)
    for path, ds in ((args.data, train), (args.test, test)):
        if ds.dim != model.dim:
            raise CLIError(f"{path}: dimension {ds.dim} does not match model dimension {model.dim}")
    if test.n == 0:
        raise CLIError(f"{args.test}: test set is empty")
    n_classes = max(int(doc.get("n_classes", 0)), train.n_classes, test.n_classes,
                    int(model.center_labels.max()) + 1)
    tcfg = TrainConfig(hidden=args.hidden, epochs=args.epochs, batch_size=args.batch_size,
                       lr=args.lr, seed=args.mlp_seed)
    timings = {"read": time.perf_counter() - t0}
    report = {
        "model": str(args.model), "data": str(args.data), "test": str(args.test),
        "train_mode": args.train_mode,
        "m": model.m, "n_train": train.n, "n_test": test.n,
        "train_config": {"hidden": tcfg.hidden, "epochs": tcfg.epochs, "batch_size": tcfg.batch_size,
                         "lr": tcfg.lr, "momentum": tcfg.momentum, "seed": tcfg.seed},
        "nearest_crc_train_accuracy": accuracy(nearest_crc_predict(model, train.instances), train.labels)
        if train.n else None,
        "nearest_crc_test_accuracy": accuracy(nearest_crc_predict(model, test.instances), test.labels),
        "train_overall_purity": overall_purity(train, model) if train.n else None,
    }
    t = time.perf_counter()
    condensed = Dataset(model.centers, model.center_labels, n_classes=n_classes)
    if np.count_nonzero(condensed.class_counts()) >= 2:
        mlp = mlp_train(condensed, tcfg)
        report["mlp_condensed_test_accuracy"] = accuracy(mlp_predict(mlp, test.instances), test.labels)
    else:
        report["mlp_condensed_test_accuracy"] = None
        report["note"] = "condensed set holds a single class; MLP not trained"
    timings["mlp_condensed"] = time.perf_counter() - t
    report["mlp_raw_test_accuracy"] = None
    report["accuracy_gap"] = None
    if args.train_mode == "raw":
        t = time.perf_counter()
        rawset = Dataset(train.instances, train.labels, n_classes=n_classes)
        mlp = mlp_train(rawset, tcfg)
        report["mlp_raw_test_accuracy"] = accuracy(mlp_predict(mlp, test.instances), test.labels)
        timings["mlp_raw"] = time.perf_counter() - t
        if report["mlp_condensed_test_accuracy"] is not None:
            # signed: condensed minus raw
            report["accuracy_gap"] = report["mlp_condensed_test_accuracy"] - report["mlp_raw_test_accuracy"]
    _write(args.report, dumps_json(report))
    _write_manifest(args, args.report, timings, report,
                    inputs=[args.model, args.data, args.test], outputs=[args.report])


def cmd_plot(args):
    t0 = time.perf_counter()
    model, names = None, None
    if args.model:
        model, doc = read_model(args.model)
        names = tuple(doc["label_names"]) if doc.get("label_names") else None
    ds = read_csv(args.data, names)
    if model is not None and model.dim != ds.dim:
        raise CLIError(f"{args.data}: dimension {ds.dim} does not match model dimension {model.dim}")
    _write(args.out, render_svg(ds, model))
    _write_manifest(args, args.out, {"plot": time.perf_counter() - t0},
                    {"instances": ds.n, "centers": 0 if model is None else model.m},
                    inputs=[p for p in (args.data, args.model) if p], outputs=[args.out])


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="crcondense",
        description="Condense labeled datasets into labeled representation centers.",
        epilog=f"Set {THREADS_ENV}=N to use N threads for distance computations.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--replay", metavar="MANIFEST", help="re-run the command recorded in a manifest")
    sub = p.add_subparsers(dest="command")

    g = sub.add_parser("generate", help="write a synthetic circles/moons CSV")
    g.add_argument("--family", choices=["circles", "moons"], required=True)
    g.add_argument("--preset", choices=sorted(PRESETS), default="clear")
    g.add_argument("--noise-std", type=float, default=None, help="overrides --preset")
    g.add_argument("--factor", type=float, default=0.5, help="inner radius for circles")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("condense", help="condense a CSV into a model file")
    c.add_argument("--in", dest="input", required=True)
    c.add_argument("--k-per-class", default="32", help="one k for all classes, or a comma list")
    c.add_argument("--step-scale", type=float, default=1.0)
    c.add_argument("--patience", type=int, default=3)
    c.add_argument("--max-iter", type=int, default=100)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out-model", required=True)
    c.add_argument("--out-trace", required=True)
    c.set_defaults(func=cmd_condense)

    e = sub.add_parser("evaluate", help="score a model and MLPs trained on it")
    e.add_argument("--model", required=True)
    e.add_argument("--train-mode", choices=["condensed", "raw"], default="raw",
                   help="'raw' also trains an MLP on the raw training data")
    e.add_argument("--data", required=True, help="raw training CSV")
    e.add_argument("--test", required=True, help="held-out test CSV")
    e.add_argument("--hidden", type=int, default=TrainConfig.hidden)
    e.add_argument("--epochs", type=int, default=TrainConfig.epochs)
    e.add_argument("--batch-size", type=int, default=TrainConfig.batch_size)
    e.add_argument("--lr", type=float, default=TrainConfig.lr)
    e.add_argument("--mlp-seed", type=int, default=0)
    e.add_argument("--report", required=True)
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("plot", help="render a dataset (and optional model) as SVG")
    s.add_argument("--data", required=True)
    s.add_argument("--model", default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plot)
    return p


def _replay(parser, path) -> argparse.Namespace:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        cmd = doc["subcommand"]
        config = doc["config"]
    except FileNotFoundError:
        raise CLIError(f"{path}: manifest not found") from None
    except (OSError, ValueError, KeyError) as e:
        raise CLIError(f"{path}: invalid manifest ({e})") from None
    args = parser.parse_args([cmd] + _required_stub(cmd))
    for k, v in config.items():
        setattr(args, k, v)
    args.command = cmd
    return args


def _required_stub(cmd):
    # satisfy argparse's required flags; real values come from the manifest
    stubs = {
        "generate": ["--family", "circles", "--n", "0", "--out", "-"],
        "condense": ["--in", "-", "--out-model", "-", "--out-trace", "-"],
        "evaluate": ["--model", "-", "--data", "-", "--test", "-", "--report", "-"],
        "plot": ["--data", "-", "--out", "-"],
    }
    if cmd not in stubs:
        raise CLIError(f"unknown subcommand {cmd!r} in manifest")
    return stubs[cmd]


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.replay:
            args = _replay(parser, args.replay)
        if not args.command:
            raise CLIError("no subcommand given")
        args.func(args)
    except (CLIError, FormatError, ValueError, OSError) as e:
        msg = str(e).replace("\n", " ")
        print(json.dumps({"error": type(e).__name__, "message": msg}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
