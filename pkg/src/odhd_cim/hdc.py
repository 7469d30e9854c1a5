"""
Hypervectors and the basic HDC operations.

Bundling is an exact integer sum, binding an element-wise product and
permutation a cyclic right rotation. Two similarity measures are provided:
cosine (software detector) and the bare dot product (CiM-friendly detector).

Usage:
    rng = np.random.default_rng(7)
    a = new_random_bipolar(10_000, rng)
    b = new_random_bipolar(10_000, rng)
    cosine_similarity(a, bundle(a, b))
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, InvalidArgumentError

HV_DTYPE = np.int64


class Kind(Enum):
    BIPOLAR = "bipolar"
    ACCUMULATOR = "accumulator"


@dataclass(frozen=True, eq=False)
class Hypervector:
    """Fixed-dimension integer vector. Elements are stored read-only."""

    elems: np.ndarray
    kind: Kind = Kind.ACCUMULATOR

    def __post_init__(self):
        elems = np.array(self.elems, dtype=HV_DTYPE).reshape(-1)
        if elems.size == 0:
            raise InvalidArgumentError("hypervector needs at least one element")
        if self.kind is Kind.BIPOLAR and not np.all(np.abs(elems) == 1):
            raise InvalidArgumentError("bipolar hypervector elements must be -1 or +1")
        elems.setflags(write=False)
        object.__setattr__(self, "elems", elems)

    @property
    def dims(self) -> int:
        return int(self.elems.shape[0])

    def __len__(self) -> int:
        return self.dims

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self.dims == other.dims and bool(np.array_equal(self.elems, other.elems))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Hypervector(dims={self.dims}, kind={self.kind.value})"

    def to_list(self) -> list[int]:
        return [int(v) for v in self.elems]


def _check_dims(a: Hypervector, b: Hypervector):
    if a.dims != b.dims:
        raise InvalidArgumentError(f"dimension mismatch: {a.dims} != {b.dims}")


def new_random_bipolar(dims: int, rng: np.random.Generator) -> Hypervector:
    """Draw each element uniformly from {-1, +1}."""
    if dims < 1:
        raise InvalidArgumentError(f"dims must be >= 1 (got {dims})")
    elems = rng.choice(np.array([-1, 1], dtype=HV_DTYPE), size=dims)
    return Hypervector(elems, Kind.BIPOLAR)


def bundle(a: Hypervector, b: Hypervector) -> Hypervector:
    _check_dims(a, b)
    return Hypervector(a.elems + b.elems, Kind.ACCUMULATOR)


def bind(a: Hypervector, b: Hypervector) -> Hypervector:
    _check_dims(a, b)
    both_bipolar = a.kind is Kind.BIPOLAR and b.kind is Kind.BIPOLAR
    return Hypervector(a.elems * b.elems, Kind.BIPOLAR if both_bipolar else Kind.ACCUMULATOR)


def permute(h: Hypervector, r: int) -> Hypervector:
    """Rotate right by r positions: permute(<h1..hd>, 1) == <hd, h1, .., h(d-1)>."""
    return Hypervector(np.roll(h.elems, r % h.dims), h.kind)


def dot_similarity(a: Hypervector, b: Hypervector) -> int:
    _check_dims(a, b)
    return int(np.dot(a.elems, b.elems))


def cosine_similarity(a: Hypervector, b: Hypervector) -> float:
    _check_dims(a, b)
    norm_a = int(np.dot(a.elems, a.elems))
    norm_b = int(np.dot(b.elems, b.elems))
    if norm_a == 0 or norm_b == 0:
        raise DomainError("cosine similarity of a zero-norm hypervector")
    value = dot_similarity(a, b) / math.sqrt(norm_a * norm_b)
    return max(-1.0, min(1.0, value))


# ============================================================================
# Batch forms used by the detector (rows of an n x D matrix against one HV)
# ============================================================================

# Rows widened to int64 per scoring step; encoded rows are stored narrower
SCORE_CHUNK = 1024


def _int_rows(rows) -> np.ndarray:
    rows = np.asarray(rows)
    if not np.issubdtype(rows.dtype, np.integer):
        rows = rows.astype(HV_DTYPE)
    return rows


def _wide_chunks(rows: np.ndarray):
    for start in range(0, rows.shape[0], SCORE_CHUNK):
        yield start, rows[start:start + SCORE_CHUNK].astype(HV_DTYPE, copy=False)


def dot_scores(rows: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Exact integer dot product of every row with h."""
    rows = _int_rows(rows)
    h = np.asarray(h, dtype=HV_DTYPE)
    if rows.shape[-1] != h.shape[0]:
        raise InvalidArgumentError(f"dimension mismatch: {rows.shape[-1]} != {h.shape[0]}")
    if rows.ndim == 1:
        return rows.astype(HV_DTYPE) @ h
    out = np.empty(rows.shape[0], dtype=HV_DTYPE)
    for start, chunk in _wide_chunks(rows):
        out[start:start + chunk.shape[0]] = chunk @ h
    return out


def row_norms(rows: np.ndarray) -> np.ndarray:
    """Exact squared norm of every row."""
    rows = _int_rows(rows)
    out = np.empty(rows.shape[0], dtype=HV_DTYPE)
    for start, chunk in _wide_chunks(rows):
        out[start:start + chunk.shape[0]] = np.einsum("ij,ij->i", chunk, chunk)
    return out


def cosine_scores(rows: np.ndarray, h: np.ndarray) -> np.ndarray:
    rows = _int_rows(rows)
    dots = dot_scores(rows, h)
    h = np.asarray(h, dtype=HV_DTYPE)
    h_norm = int(np.dot(h, h))
    norms = row_norms(rows)
    if h_norm == 0 or np.any(norms == 0):
        raise DomainError("cosine similarity of a zero-norm hypervector")
    # Same exact-integer denominator as cosine_similarity, so both agree bit for bit
    scores = [d / math.sqrt(n * h_norm) for d, n in zip(dots.tolist(), norms.tolist())]
    return np.clip(np.array(scores, dtype=np.float64), -1.0, 1.0)
