"""
odhd: one-class HDC outlier detection and IM-ODHD mat simulation.

Usage:
    # Train a model on the inliers of a labelled CSV
    odhd train --dataset data/wbc.csv --variant cim --out models/wbc.json

    # Score a CSV with a saved model (index,label,score)
    odhd detect --model models/wbc.json --dataset data/wbc.csv --out wbc_scores.csv

    # Repeated evaluation (mean/std of ACC, F1, AUC)
    odhd eval --dataset synthetic --levels 20 --repeats 10 --out summary.json

    # Latency/energy breakdown on a mat design (writes .json and .txt)
    odhd simulate --dataset wbc --design design1 --out reports/wbc.json

    # Compare designs over all ODDS shapes
    odhd sweep --out reports/sweep.json

Flags given on the command line override values from --config.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .cim.costs import load_cost_table, load_design
from .cim.simulate import ModelShape, Workload, simulate_testing, simulate_training, sweep
from .config import COMMANDS, SYNTHETIC, RunConfig, load_config, merge
from .data.dataset import (
    Dataset,
    load_dataset,
    load_odds_shapes,
    make_synthetic,
    odds_shape,
    split_pu,
    train_count,
)
from .data.experiment import ExperimentConfig, run_experiment
from .data.metrics import compute_metrics
from .detector import DetectorConfig, Variant, detect_batch, fit, load_model
from .errors import ConfigError, OdhdError
from .log import setup_logger

# Flags that map one-to-one onto RunConfig fields
FLAG_FIELDS = (
    "dataset", "variant", "dims", "levels", "epochs", "design", "cost_table", "repeats",
    "seed", "out", "train_fraction", "deviation_scale", "update_fraction", "queries",
    "model", "hardware_division",
)


# ============================================================================
# Output helpers
# ============================================================================

def atomic_write_text(path: Path, text: str):
    """Write via a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(path, text)


def banner(title: str, lines: list[str]):
    print("\n" + "=" * 60, file=sys.stderr)
    print(title, file=sys.stderr)
    print("=" * 60, file=sys.stderr)
    for line in lines:
        print(line, file=sys.stderr)


# ============================================================================
# Inputs
# ============================================================================

def _dataset(cfg: RunConfig) -> Dataset:
    if cfg.dataset_kind == SYNTHETIC:
        return make_synthetic(rng=np.random.default_rng(cfg.seed))
    return load_dataset(cfg.dataset)


def _detector_config(cfg: RunConfig) -> DetectorConfig:
    return DetectorConfig(
        dims=cfg.dims,
        levels=cfg.levels,
        epochs=cfg.epochs,
        variant=cfg.variant_enum,
        deviation_scale=cfg.deviation_scale,
        hardware_division=cfg.hardware_division,
    )


def _workloads(cfg: RunConfig) -> list[Workload]:
    kind = cfg.dataset_kind
    if kind in ("none", "odds"):
        shapes = load_odds_shapes() if kind == "none" else [odds_shape(str(cfg.dataset))]
        return [
            Workload(
                s.name,
                s.train_samples(cfg.train_fraction),
                s.features,
                cfg.queries if cfg.queries is not None else s.test_samples(cfg.train_fraction),
            )
            for s in shapes
        ]
    ds = _dataset(cfg)
    n = train_count(ds.n_inliers, cfg.train_fraction)
    return [Workload(ds.name, n, ds.m, cfg.queries if cfg.queries is not None else ds.n - n)]


def _model_shape(cfg: RunConfig) -> ModelShape:
    return ModelShape(cfg.dims, cfg.levels, cfg.epochs, cfg.update_fraction)


def _tables(cfg: RunConfig, designs) -> list:
    if cfg.cost_table is not None:
        table = load_cost_table(cfg.cost_table)
        return [table] * len(designs)
    return [load_cost_table(d.name) for d in designs]


def _text_path(out: Path) -> Path:
    return out.with_suffix(".txt")


# ============================================================================
# Commands
# ============================================================================

def cmd_train(cfg: RunConfig) -> int:
    ds = _dataset(cfg)
    rng = np.random.default_rng(cfg.seed)
    train_rows, test = split_pu(ds, cfg.train_fraction, rng)
    model = fit(train_rows, _detector_config(cfg), rng)
    emit(cfg.out, model.to_json() + "\n")

    predictions, scores = detect_batch(model, test.features)
    metrics = compute_metrics(test.labels, predictions, scores)
    banner("TRAINING", [
        f"Dataset: {ds.name} (n={ds.n}, m={ds.m}, outliers={ds.n_outliers})",
        f"Variant: {model.variant.value}  D={model.dims}  k={model.seeds.k}  epochs={model.epochs}",
        f"Training rows: {train_rows.shape[0]}",
        f"Threshold R: {model.threshold:.6g}",
        f"Updates per epoch: {list(model.updates_per_epoch)}",
        f"Held-out: acc={metrics.acc:.4f} f1={metrics.f1:.4f} auc={metrics.auc:.4f}",
        f"Model: {cfg.out or 'stdout'}",
    ])
    return 0


def cmd_detect(cfg: RunConfig) -> int:
    model = load_model(cfg.model)
    ds = load_dataset(cfg.dataset)
    predictions, scores = detect_batch(model, ds.features)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["index", "label", "score"])
    for i, (label, score) in enumerate(zip(predictions.tolist(), scores.tolist())):
        writer.writerow([i, label, repr(score) if model.variant is Variant.SOFTWARE else int(score)])
    emit(cfg.out, buf.getvalue())

    metrics = compute_metrics(ds.labels, predictions, scores)
    banner("DETECTION", [
        f"Samples: {ds.n}",
        f"Flagged outliers: {int(predictions.sum())}",
        f"Against file labels: acc={metrics.acc:.4f} f1={metrics.f1:.4f} auc={metrics.auc:.4f}",
        f"Scores: {cfg.out or 'stdout'}",
    ])
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    ds = _dataset(cfg)
    exp = ExperimentConfig(
        variant=cfg.variant_enum,
        dims=cfg.dims,
        levels=cfg.levels,
        epochs=cfg.epochs,
        repeats=cfg.repeats,
        seed=cfg.seed,
        train_fraction=cfg.train_fraction,
        deviation_scale=cfg.deviation_scale,
        hardware_division=cfg.hardware_division,
    )
    summary = run_experiment(ds, exp)
    emit(cfg.out, to_json(summary.to_dict()))

    banner("EVALUATION", [f"Dataset: {ds.name}  repeats={cfg.repeats}  variant={exp.variant.value}"] + [
        f"  {name.upper():<4} {summary.mean(name):.4f} +/- {summary.std(name):.4f}"
        for name in ("acc", "f1", "auc")
    ])
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    names = cfg.design_names()
    if len(names) != 1:
        raise ConfigError("simulate takes one design; use sweep to compare designs")
    design = load_design(names[0])
    table = _tables(cfg, [design])[0]
    shape = _model_shape(cfg)
    workload = _workloads(cfg)[0]

    training = simulate_training(workload, shape, design, table)
    testing = simulate_testing(workload, shape, design, table)
    text = training.render_text() + "\n" + testing.render_text()
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(cfg.out, to_json({"training": training.to_dict(), "testing": testing.to_dict()}))
        atomic_write_text(_text_path(cfg.out), text)

    shares = training.shares()
    banner("SIMULATION", [
        f"Workload: {workload.name} (n={workload.n} -> {workload.padded_n}, m={workload.m}, "
        f"queries={workload.queries})",
        f"Design: {design.name}",
        f"Training total: {training.total.latency_us:.3f} us / {training.total.energy_uj:.3f} uJ",
        f"Testing total: {testing.total.latency_us:.3f} us / {testing.total.energy_uj:.3f} uJ",
        f"Encoding share of training latency: {shares['encoding_latency']:.1%}",
    ])
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    designs = [load_design(name) for name in cfg.design_names()]
    report = sweep(designs, _workloads(cfg), _model_shape(cfg), _tables(cfg, designs))
    text = report.render_text()
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(cfg.out, to_json(report.to_dict()))
        atomic_write_text(_text_path(cfg.out), text)

    ranked = report.to_dict()
    banner("DESIGN SWEEP", [
        f"Designs: {', '.join(d.name for d in designs)}",
        f"Workloads: {len(report.entries) // len(designs)}",
        f"Fastest training: {' < '.join(ranked['rank_by_latency'])}",
        f"Lowest energy: {' < '.join(ranked['rank_by_energy'])}",
    ])
    return 0


HANDLERS = {
    "train": cmd_train,
    "detect": cmd_detect,
    "eval": cmd_eval,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


# ============================================================================
# Argument parsing
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    # Defaults are suppressed so only explicitly given flags override --config
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="JSON file with RunConfig fields")
    common.add_argument("--dataset", type=Path,
                        help="CSV (f_1..f_m,label), 'synthetic', or an ODDS name for simulate/sweep")
    common.add_argument("--variant", choices=[v.value for v in Variant],
                        help="Detector variant (default: software)")
    common.add_argument("--dims", type=int, help="Hypervector dimension D (default: 10000)")
    common.add_argument("--levels", type=int, help="Quantization levels k (default: 10)")
    common.add_argument("--epochs", type=int, help="Fine-tuning epochs (default: 10)")
    common.add_argument("--design",
                        help="design1|design2|design3 or a JSON file; comma-separated for sweep")
    common.add_argument("--cost-table", dest="cost_table", type=Path,
                        help="Cost table JSON (default: the design's preset)")
    common.add_argument("--repeats", type=int, help="Evaluation repeats (default: 10)")
    common.add_argument("--seed", type=int, help="Master seed (default: 0)")
    common.add_argument("--out", "-o", type=Path, help="Output file (default: stdout)")
    common.add_argument("--train-fraction", dest="train_fraction", type=float,
                        help="Share of inliers used for training (default: 0.8)")
    common.add_argument("--deviation-scale", dest="deviation_scale", type=float,
                        help="c in R = mean + c * deviation (default: 2.0)")
    common.add_argument("--update-fraction", dest="update_fraction", type=float,
                        help="simulate: share of samples re-bundled per epoch (default: 0.0)")
    common.add_argument("--queries", type=int,
                        help="simulate: test queries (default: size of the test split)")
    common.add_argument("--model", type=Path, help="detect: model JSON written by train")
    common.add_argument("--hardware-division", dest="hardware_division", action="store_true",
                        help="cim: floor right shifts for the mean and MAD")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(
        prog="odhd",
        description="One-class HDC outlier detection and IM-ODHD mat simulation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "train": "Fit a one-class model on the inliers of a dataset",
        "detect": "Label and score a dataset with a saved model",
        "eval": "Repeated train/evaluate runs with mean/std metrics",
        "simulate": "Latency/energy breakdown of training and testing on one design",
        "sweep": "Compare mat designs over dataset shapes",
    }
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    flags = {name: getattr(args, name) for name in FLAG_FIELDS if hasattr(args, name)}
    flags["command"] = args.command
    if "variant" in flags:
        flags["variant"] = str(flags["variant"])
    return merge(file_values, flags).validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(getattr(args, "verbose", False))
    try:
        cfg = resolve_config(args)
        return HANDLERS[cfg.command](cfg)
    except OdhdError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
