"""Per-feature uniform level quantizer."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Quantizer:
    """k uniform intervals over each feature's observed [f_min, f_max]."""

    k: int
    mins: np.ndarray  # shape (m,)
    maxs: np.ndarray  # shape (m,)

    def __post_init__(self):
        if self.k < 2:
            raise InvalidArgumentError(f"level count k must be >= 2 (got {self.k})")
        mins = np.asarray(self.mins, dtype=np.float64).reshape(-1)
        maxs = np.asarray(self.maxs, dtype=np.float64).reshape(-1)
        if mins.shape != maxs.shape or mins.size == 0:
            raise InvalidArgumentError("quantizer bounds must be two equal-length non-empty vectors")
        if np.any(mins > maxs):
            raise InvalidArgumentError("quantizer needs f_min <= f_max for every feature")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def m(self) -> int:
        return int(self.mins.shape[0])

    @property
    def widths(self) -> np.ndarray:
        return (self.maxs - self.mins) / self.k

    def to_dict(self) -> dict:
        return {"k": self.k, "mins": self.mins.tolist(), "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Quantizer":
        return cls(int(d["k"]), np.array(d["mins"]), np.array(d["maxs"]))


def fit_quantizer(train: np.ndarray, k: int) -> Quantizer:
    train = np.asarray(train, dtype=np.float64)
    if train.ndim != 2 or train.shape[0] < 1 or train.shape[1] < 1:
        raise InvalidArgumentError(f"training matrix must be n x m with n, m >= 1 (got shape {train.shape})")
    mins = train.min(axis=0)
    maxs = train.max(axis=0)
    constant = int(np.sum(mins == maxs))
    if constant:
        logger.warning(f"{constant} constant feature(s); they always quantize to level 1")
    return Quantizer(k, mins, maxs)


def quantize_batch(q: Quantizer, X: np.ndarray) -> np.ndarray:
    """Level indices in [1, k] for every row of X (shape n x m)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != q.m:
        raise InvalidArgumentError(f"expected {q.m} features per row (got shape {X.shape})")
    widths = q.widths
    flat = widths == 0
    safe = np.where(flat, 1.0, widths)
    levels = 1 + np.floor((X - q.mins) / safe)
    levels = np.clip(levels, 1, q.k).astype(np.int64)
    levels[:, flat] = 1
    return levels


def quantize(q: Quantizer, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != q.m:
        raise InvalidArgumentError(f"feature vector has {x.shape[0]} values, quantizer expects {q.m}")
    return quantize_batch(q, x[None, :])[0]
