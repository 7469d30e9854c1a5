"""
Datasets: CSV ingestion, positive-unlabeled splitting, the synthetic
Gaussian benchmark and the shape metadata of the ODDS benchmark sets.

CSV schema: a header row, numeric feature columns (f_1..f_m) and a final
`label` column holding 0 (inlier) or 1 (outlier).
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InvalidArgumentError, ParseError

logger = logging.getLogger(__name__)

LABEL_COLUMN = "label"
INLIER, OUTLIER = 0, 1


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray  # n x m
    labels: np.ndarray    # n, 0 = inlier, 1 = outlier
    name: str = "dataset"

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if features.ndim != 2 or features.shape[1] < 1:
            raise InvalidArgumentError(f"features must be an n x m matrix with m >= 1 (got shape {features.shape})")
        if labels.shape[0] != features.shape[0]:
            raise InvalidArgumentError(f"{labels.shape[0]} labels for {features.shape[0]} rows")
        if not np.all((labels == INLIER) | (labels == OUTLIER)):
            raise InvalidArgumentError("labels must be 0 (inlier) or 1 (outlier)")
        if not np.any(labels == INLIER):
            raise InvalidArgumentError(f"dataset {self.name!r} has no inliers")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def m(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_outliers(self) -> int:
        return int(np.sum(self.labels == OUTLIER))

    @property
    def n_inliers(self) -> int:
        return self.n - self.n_outliers

    def summary(self) -> dict:
        return {"name": self.name, "n": self.n, "m": self.m, "outliers": self.n_outliers}


def _parse_cell(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric value {text!r} in column {column!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r} in column {column!r}", line)
    return value


def load_dataset(path: Path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"dataset file {path} does not exist")

    rows: list[list[float]] = []
    labels: list[int] = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file, expected a header row", 1)
        header = [h.strip() for h in header]
        if len(header) < 2 or header[-1].lower() != LABEL_COLUMN:
            raise ParseError(f"last header column must be {LABEL_COLUMN!r} after at least one feature", 1)
        width = len(header)

        for record in reader:
            line = reader.line_num
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != width:
                raise ParseError(f"expected {width} columns, found {len(record)}", line)
            values = [_parse_cell(cell, line, name) for cell, name in zip(record, header)]
            label = values[-1]
            if label not in (INLIER, OUTLIER):
                raise ParseError(f"label must be 0 or 1 (got {record[-1]!r})", line)
            rows.append(values[:-1])
            labels.append(int(label))

    if not rows:
        raise ParseError("no data rows after the header", 2)
    try:
        ds = Dataset(np.array(rows), np.array(labels), path.stem)
    except InvalidArgumentError as e:
        raise ParseError(str(e)) from None
    logger.debug(f"Loaded {path}: n={ds.n}, m={ds.m}, outliers={ds.n_outliers}")
    return ds


# ============================================================================
# Splitting and generation
# ============================================================================

def train_count(n_inliers: int, fraction: float) -> int:
    """Inliers drawn for training: round(fraction * n_inliers), at least one."""
    return min(n_inliers, max(1, round(fraction * n_inliers)))


def split_pu(ds: Dataset, train_fraction: float, rng: np.random.Generator) -> tuple[np.ndarray, Dataset]:
    """
    Inlier-only training matrix plus a mixed test set.

    All outliers and the held-out inliers go to the test set. Both parts keep
    the dataset's row order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise InvalidArgumentError(f"train_fraction must be in (0, 1) (got {train_fraction})")
    inliers = np.flatnonzero(ds.labels == INLIER)
    if inliers.size == 0:
        raise InvalidArgumentError(f"dataset {ds.name!r} has no inliers to train on")
    chosen = np.sort(rng.choice(inliers, size=train_count(inliers.size, train_fraction), replace=False))
    test_mask = np.ones(ds.n, dtype=bool)
    test_mask[chosen] = False
    test = Dataset(ds.features[test_mask], ds.labels[test_mask], f"{ds.name}-test")
    return ds.features[chosen], test


def make_synthetic(
    n_inliers: int = 200,
    n_outliers: int = 20,
    dims: int = 10,
    shift: float = 5.0,
    rng: np.random.Generator | None = None,
) -> Dataset:
    """Standard-normal inliers; outliers offset by `shift` sigma in every feature."""
    if n_inliers < 1 or n_outliers < 0 or dims < 1:
        raise InvalidArgumentError(
            f"synthetic set needs n_inliers >= 1, n_outliers >= 0, dims >= 1 "
            f"(got {n_inliers}, {n_outliers}, {dims})"
        )
    rng = rng if rng is not None else np.random.default_rng(0)
    inliers = rng.standard_normal((n_inliers, dims))
    outliers = rng.standard_normal((n_outliers, dims)) + shift
    features = np.concatenate([inliers, outliers])
    labels = np.concatenate([np.zeros(n_inliers, dtype=np.int64), np.ones(n_outliers, dtype=np.int64)])
    order = rng.permutation(features.shape[0])
    return Dataset(features[order], labels[order], "synthetic")


# ============================================================================
# ODDS shape metadata (no data is shipped)
# ============================================================================

@dataclass(frozen=True)
class OddsShape:
    name: str
    samples: int
    outliers: int
    features: int

    @property
    def inliers(self) -> int:
        return self.samples - self.outliers

    def train_samples(self, train_fraction: float = 0.8) -> int:
        return train_count(self.inliers, train_fraction)

    def test_samples(self, train_fraction: float = 0.8) -> int:
        return self.samples - self.train_samples(train_fraction)


def load_odds_shapes() -> list[OddsShape]:
    text = resources.files("odhd_cim.presets").joinpath("odds_shapes.json").read_text()
    doc = json.loads(text)
    return [OddsShape(name, **fields) for name, fields in doc.items()]


def odds_shape(name: str) -> OddsShape:
    shapes = {s.name: s for s in load_odds_shapes()}
    key = name.lower()
    if key not in shapes:
        raise ConfigError(f"unknown ODDS dataset {name!r} (known: {', '.join(shapes)})")
    return shapes[key]
