"""Shared fixtures."""

from pathlib import Path

import numpy as np
import pytest

from odhd_cim.data import make_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def synthetic():
    """Small version of the Gaussian benchmark: 200 inliers, 20 outliers, 10 features."""
    return make_synthetic(rng=np.random.default_rng(7))


@pytest.fixture
def write_csv(tmp_path):
    """Write rows (features..., label) under a header and return the path."""

    def _write(rows, name="data.csv", header=None):
        rows = [list(r) for r in rows]
        if header is None:
            width = len(rows[0]) if rows else 2
            header = [f"f_{i + 1}" for i in range(width - 1)] + ["label"]
        lines = [",".join(header)] + [",".join(str(v) for v in r) for r in rows]
        path = Path(tmp_path) / name
        path.write_text("\n".join(lines) + "\n")
        return path

    return _write


@pytest.fixture
def synthetic_csv(write_csv, synthetic):
    rows = [list(f) + [int(l)] for f, l in zip(synthetic.features.tolist(), synthetic.labels.tolist())]
    return write_csv(rows, name="synthetic.csv")
