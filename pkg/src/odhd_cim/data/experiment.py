"""
Repeated train/evaluate runs with independent seeded streams.

Each repeat gets its own child of the master SeedSequence, so results do not
depend on how the thread pool schedules repeats.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..detector import DetectorConfig, Variant, detect_batch, fit
from ..errors import InvalidArgumentError
from .dataset import Dataset, split_pu
from .metrics import Metrics, compute_metrics

logger = logging.getLogger(__name__)

METRIC_NAMES = ("acc", "f1", "auc")


@dataclass(frozen=True)
class ExperimentConfig:
    variant: Variant = Variant.SOFTWARE
    dims: int = 10_000
    levels: int = 10
    epochs: int = 10
    repeats: int = 10
    seed: int = 0
    train_fraction: float = 0.8
    deviation_scale: float = 2.0
    hardware_division: bool = False
    workers: Optional[int] = None  # thread pool size; None = min(repeats, CPUs)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.repeats < 1:
            raise InvalidArgumentError(f"repeats must be >= 1 (got {self.repeats})")

    def detector(self) -> DetectorConfig:
        return DetectorConfig(
            dims=self.dims,
            levels=self.levels,
            epochs=self.epochs,
            variant=self.variant,
            deviation_scale=self.deviation_scale,
            hardware_division=self.hardware_division,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        d.pop("workers")
        return d


@dataclass(frozen=True)
class RunResult:
    repeat: int
    metrics: Metrics
    threshold: float
    updates_per_epoch: tuple[int, ...]
    fit_seconds: float
    detect_seconds: float

    def to_dict(self, include_timings: bool = False) -> dict:
        d = {"repeat": self.repeat, **self.metrics.to_dict(), "threshold": self.threshold,
             "updates_per_epoch": list(self.updates_per_epoch)}
        if include_timings:
            d["fit_seconds"] = self.fit_seconds
            d["detect_seconds"] = self.detect_seconds
        return d


@dataclass(frozen=True)
class ExperimentSummary:
    dataset: dict
    config: ExperimentConfig
    runs: tuple[RunResult, ...]

    def values(self, metric: str) -> list[float]:
        return [getattr(r.metrics, metric) for r in self.runs]

    def mean(self, metric: str) -> float:
        """Mean over runs where the metric is defined (NaN if none)."""
        vals = [v for v in self.values(metric) if not np.isnan(v)]
        return float(np.mean(vals)) if vals else float("nan")

    def std(self, metric: str) -> float:
        """Population standard deviation over defined runs."""
        vals = [v for v in self.values(metric) if not np.isnan(v)]
        return float(np.std(vals)) if vals else float("nan")

    def to_dict(self, include_timings: bool = False) -> dict:
        def clean(v: float):
            return None if np.isnan(v) else v

        metrics = {
            name: {
                "mean": clean(self.mean(name)),
                "std": clean(self.std(name)),
                "values": [clean(v) for v in self.values(name)],
            }
            for name in METRIC_NAMES
        }
        d = {
            "dataset": self.dataset,
            "config": self.config.to_dict(),
            "metrics": metrics,
            "runs": [r.to_dict(include_timings) for r in self.runs],
        }
        if include_timings:
            d["timings"] = {
                "fit_seconds_mean": float(np.mean([r.fit_seconds for r in self.runs])),
                "detect_seconds_mean": float(np.mean([r.detect_seconds for r in self.runs])),
            }
        return d


def run_once(ds: Dataset, cfg: ExperimentConfig, repeat: int, seed: np.random.SeedSequence) -> RunResult:
    rng = np.random.default_rng(seed)
    train_rows, test = split_pu(ds, cfg.train_fraction, rng)

    start = time.perf_counter()
    model = fit(train_rows, cfg.detector(), rng)
    fit_seconds = time.perf_counter() - start

    start = time.perf_counter()
    predictions, scores = detect_batch(model, test.features)
    detect_seconds = time.perf_counter() - start

    metrics = compute_metrics(test.labels, predictions, scores)
    logger.info(
        f"Repeat {repeat + 1}/{cfg.repeats}: acc={metrics.acc:.4f} f1={metrics.f1:.4f} "
        f"auc={metrics.auc:.4f} ({fit_seconds:.2f}s fit)"
    )
    return RunResult(repeat, metrics, model.threshold, model.updates_per_epoch, fit_seconds, detect_seconds)


def run_experiment(ds: Dataset, cfg: ExperimentConfig) -> ExperimentSummary:
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.repeats)
    workers = cfg.workers or min(cfg.repeats, os.cpu_count() or 1)

    results: list[Optional[RunResult]] = [None] * cfg.repeats
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {
            executor.submit(run_once, ds, cfg, i, child): i
            for i, child in enumerate(children)
        }
        for future, i in futures.items():
            results[i] = future.result()

    return ExperimentSummary(ds.summary(), cfg, tuple(results))
