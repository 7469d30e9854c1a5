"""Dataset ingestion, splitting, metrics and the repeated-run harness."""

from .dataset import (
    Dataset,
    OddsShape,
    load_dataset,
    load_odds_shapes,
    make_synthetic,
    odds_shape,
    split_pu,
    train_count,
)
from .experiment import ExperimentConfig, ExperimentSummary, RunResult, run_experiment
from .metrics import Metrics, compute_metrics

__all__ = [
    "Dataset",
    "ExperimentConfig",
    "ExperimentSummary",
    "Metrics",
    "OddsShape",
    "RunResult",
    "compute_metrics",
    "load_dataset",
    "load_odds_shapes",
    "make_synthetic",
    "odds_shape",
    "run_experiment",
    "split_pu",
    "train_count",
]
