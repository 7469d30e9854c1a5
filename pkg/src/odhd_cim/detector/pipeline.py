"""
The one-class detector pipeline: quantize, encode, train, threshold,
fine-tune and detect.

Both variants share the pipeline; they differ in the similarity measure
(cosine or dot), the deviation used for the threshold (population std or
mean absolute deviation) and power-of-two padding of the training set.

Usage:
    rng = np.random.default_rng(0)
    model = fit(train_rows, DetectorConfig(variant=Variant.CIM), rng)
    labels, scores = detect_batch(model, test_rows)
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from ..errors import DomainError, InvalidArgumentError
from ..hdc import (
    HV_DTYPE,
    Hypervector,
    Kind,
    cosine_scores,
    cosine_similarity,
    dot_scores,
    dot_similarity,
    row_norms,
)
from .model import DetectorConfig, Label, OneClassModel, Variant
from .quantizer import Quantizer, fit_quantizer, quantize, quantize_batch
from .seeds import SeedSet, generate_seeds

logger = logging.getLogger(__name__)

EncodedSet = Union[np.ndarray, Sequence[Hypervector]]

# Rows gathered per numpy step while encoding; bounds the temporary at
# ENCODE_CHUNK x D elements.
ENCODE_CHUNK = 1024


def _as_matrix(encoded: EncodedSet) -> np.ndarray:
    if isinstance(encoded, np.ndarray):
        rows = encoded if np.issubdtype(encoded.dtype, np.integer) else encoded.astype(HV_DTYPE)
        if rows.ndim != 2:
            raise InvalidArgumentError(f"encoded set must be an n x D matrix (got shape {rows.shape})")
    else:
        encoded = list(encoded)
        if not encoded:
            raise InvalidArgumentError("encoded set is empty")
        dims = {h.dims for h in encoded}
        if len(dims) != 1:
            raise InvalidArgumentError(f"encoded hypervectors differ in dims: {sorted(dims)}")
        rows = np.stack([h.elems for h in encoded])
    if rows.shape[0] == 0:
        raise InvalidArgumentError("encoded set is empty")
    return rows


# ============================================================================
# Encoding and training
# ============================================================================

def encode(seeds: SeedSet, q: Quantizer, x) -> Hypervector:
    """H = sum over features i of the level seed rotated by i - 1."""
    levels = quantize(q, x)
    acc = np.zeros(seeds.dims, dtype=HV_DTYPE)
    for i, level in enumerate(levels):
        acc += np.roll(seeds.seeds[level - 1], i)
    return Hypervector(acc, Kind.ACCUMULATOR)


def encoded_dtype(m: int) -> np.dtype:
    """Narrowest signed dtype for an m-feature encoding, whose elements lie in [-m, m]."""
    for dtype in (np.int8, np.int16, np.int32):
        if m <= np.iinfo(dtype).max:
            return np.dtype(dtype)
    return np.dtype(HV_DTYPE)


def encode_batch(seeds: SeedSet, q: Quantizer, X: np.ndarray) -> np.ndarray:
    """Vectorised encode: n x m features -> n x D accumulators of `encoded_dtype(m)`."""
    levels = quantize_batch(q, X) - 1
    n = levels.shape[0]
    dtype = encoded_dtype(q.m)
    out = np.zeros((n, seeds.dims), dtype=dtype)
    for i in range(q.m):
        rotated = np.roll(seeds.seeds, i, axis=1).astype(dtype)
        for start in range(0, n, ENCODE_CHUNK):
            stop = min(start + ENCODE_CHUNK, n)
            out[start:stop] += rotated[levels[start:stop, i]]
    return out


def train(encoded: EncodedSet) -> Hypervector:
    rows = _as_matrix(encoded)
    return Hypervector(rows.sum(axis=0, dtype=HV_DTYPE), Kind.ACCUMULATOR)


# ============================================================================
# Threshold estimation
# ============================================================================

def similarity_scores(rows: np.ndarray, h: np.ndarray, variant: Variant) -> np.ndarray:
    if variant is Variant.SOFTWARE:
        return cosine_scores(rows, h)
    return dot_scores(rows, h)


def mean_absolute_deviation(S) -> float:
    S = np.asarray(S)
    if S.size == 0:
        raise InvalidArgumentError("similarity array is empty")
    if np.issubdtype(S.dtype, np.integer):
        return float(_exact_mad(S.tolist(), hardware_division=False)[1])
    S = S.astype(np.float64)
    return float(np.mean(np.abs(S - S.mean())))


def _exact_mad(values: list[int], hardware_division: bool) -> tuple[Fraction, Fraction]:
    """Exact (mean, MAD) of integer scores; floor shifts when hardware_division."""
    n = len(values)
    total = sum(values)
    if hardware_division:
        if n & (n - 1):
            raise InvalidArgumentError(f"hardware division needs a power-of-two count (got {n})")
        shift = n.bit_length() - 1
        mu = total >> shift
        mad = sum(abs(v - mu) for v in values) >> shift
        return Fraction(mu), Fraction(mad)
    mu = Fraction(total, n)
    mad = Fraction(sum(abs(n * v - total) for v in values), n * n)
    return mu, mad


def threshold_from_scores(
    S,
    variant: Variant,
    deviation_scale: float = 2.0,
    hardware_division: bool = False,
) -> float:
    """R = mean + c * std (software) or mean + c * MAD (cim)."""
    S = np.asarray(S)
    if S.size == 0:
        raise InvalidArgumentError("similarity array is empty")
    if variant is Variant.SOFTWARE:
        S = S.astype(np.float64)
        return float(S.mean() + deviation_scale * S.std())
    if np.issubdtype(S.dtype, np.integer):
        mu, mad = _exact_mad(S.tolist(), hardware_division)
        return float(mu + Fraction(deviation_scale) * mad)
    S = S.astype(np.float64)
    mu = S.mean()
    return float(mu + deviation_scale * np.mean(np.abs(S - mu)))


def compute_threshold(
    h_oc: Hypervector,
    encoded: EncodedSet,
    variant: Variant,
    deviation_scale: float = 2.0,
    hardware_division: bool = False,
) -> tuple[float, np.ndarray]:
    rows = _as_matrix(encoded)
    if rows.shape[1] != h_oc.dims:
        raise InvalidArgumentError(f"dimension mismatch: {rows.shape[1]} != {h_oc.dims}")
    S = similarity_scores(rows, h_oc.elems, variant)
    return threshold_from_scores(S, variant, deviation_scale, hardware_division), S


def pad_to_power_of_two(train_rows: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Append distinct original rows until the row count is a power of two."""
    train_rows = np.asarray(train_rows)
    n = train_rows.shape[0]
    if n < 1:
        raise InvalidArgumentError("cannot pad an empty training set")
    target = 1 << (n - 1).bit_length()
    gap = target - n
    if gap == 0:
        return train_rows
    picked = rng.choice(n, size=gap, replace=False)
    logger.warning(f"Padding {n} training rows to {target}: {gap} rows duplicated")
    return np.concatenate([train_rows, train_rows[picked]], axis=0)


# ============================================================================
# Fine-tuning
# ============================================================================

def fine_tune(model: OneClassModel, encoded: EncodedSet, epochs: int) -> OneClassModel:
    """
    Bundle every training HV whose similarity falls below R into H_OC.

    Comparisons within an epoch use the running H_OC, in training order.
    R is recomputed over the whole training set after each epoch.
    """
    if epochs < 0:
        raise InvalidArgumentError(f"epochs must be >= 0 (got {epochs})")
    if epochs == 0:
        return model

    rows = _as_matrix(encoded)
    if rows.shape[1] != model.dims:
        raise InvalidArgumentError(f"dimension mismatch: {rows.shape[1]} != {model.dims}")
    use_cosine = model.variant is Variant.SOFTWARE
    norms = row_norms(rows).tolist()

    h = model.h_oc.elems.copy()
    h_norm = int(np.dot(h, h))
    threshold = model.threshold
    history = list(model.threshold_history) or [threshold]
    updates_per_epoch = list(model.updates_per_epoch)

    for epoch in range(1, epochs + 1):
        updates = 0
        for t in range(rows.shape[0]):
            d = int(np.dot(rows[t], h))
            if use_cosine:
                rn = norms[t]
                if rn == 0 or h_norm == 0:
                    raise DomainError("cosine similarity of a zero-norm hypervector")
                sim = max(-1.0, min(1.0, d / math.sqrt(rn * h_norm)))
            else:
                sim = d
            if sim < threshold:
                h += rows[t]
                h_norm += 2 * d + norms[t]
                updates += 1

        if updates:
            threshold, _ = compute_threshold(
                Hypervector(h, Kind.ACCUMULATOR), rows, model.variant,
                model.deviation_scale, model.hardware_division,
            )
        history.append(threshold)
        updates_per_epoch.append(updates)
        logger.debug(f"Epoch {epoch}/{epochs}: {updates} updates, R={threshold:.6g}")

    return OneClassModel(
        h_oc=Hypervector(h, Kind.ACCUMULATOR),
        threshold=threshold,
        seeds=model.seeds,
        quantizer=model.quantizer,
        variant=model.variant,
        epochs=model.epochs + epochs,
        deviation_scale=model.deviation_scale,
        hardware_division=model.hardware_division,
        threshold_history=tuple(history),
        updates_per_epoch=tuple(updates_per_epoch),
    )


# ============================================================================
# Detection and the end-to-end fit
# ============================================================================

def detect(model: OneClassModel, x) -> tuple[Label, float]:
    h_q = encode(model.seeds, model.quantizer, x)
    if model.variant is Variant.SOFTWARE:
        score = cosine_similarity(h_q, model.h_oc)
    else:
        score = dot_similarity(h_q, model.h_oc)
    label = Label.INLIER if score >= model.threshold else Label.OUTLIER
    return label, score


def detect_batch(model: OneClassModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Labels (0 inlier, 1 outlier) and scores for every row of X."""
    rows = encode_batch(model.seeds, model.quantizer, X)
    scores = similarity_scores(rows, model.h_oc.elems, model.variant)
    labels = np.where(scores >= model.threshold, int(Label.INLIER), int(Label.OUTLIER))
    return labels.astype(np.int64), scores


def fit(train_rows: np.ndarray, config: DetectorConfig, rng: np.random.Generator) -> OneClassModel:
    """Train a one-class model on inlier-only rows."""
    train_rows = np.asarray(train_rows, dtype=np.float64)
    quantizer = fit_quantizer(train_rows, config.levels)
    seeds = generate_seeds(config.dims, config.levels, rng)
    if config.variant is Variant.CIM:
        train_rows = pad_to_power_of_two(train_rows, rng)

    encoded = encode_batch(seeds, quantizer, train_rows)
    h_oc = train(encoded)
    hardware_division = config.hardware_division and config.variant is Variant.CIM
    threshold, _ = compute_threshold(
        h_oc, encoded, config.variant, config.deviation_scale, hardware_division,
    )
    logger.debug(
        f"Trained {config.variant.value} model on {encoded.shape[0]} rows "
        f"(D={config.dims}, k={config.levels}); initial R={threshold:.6g}"
    )
    model = OneClassModel(
        h_oc=h_oc,
        threshold=threshold,
        seeds=seeds,
        quantizer=quantizer,
        variant=config.variant,
        deviation_scale=config.deviation_scale,
        hardware_division=hardware_division,
        threshold_history=(threshold,),
    )
    return fine_tune(model, encoded, config.epochs)
