"""Detection metrics with the outlier as the positive class."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.metrics import accuracy_score, confusion_matrix, f1_score, roc_auc_score

from ..errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Metrics:
    acc: float
    f1: float
    auc: float  # NaN when the labels hold a single class
    tp: int
    fp: int
    fn: int
    tn: int
    auc_defined: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        if not self.auc_defined:
            d["auc"] = None
        return d


def compute_metrics(labels, predictions, scores) -> Metrics:
    """
    labels/predictions: 0 inlier, 1 outlier. scores: higher means more
    inlier-like; AUC ranks the negated scores so outliers rank high.
    """
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    predictions = np.asarray(predictions, dtype=np.int64).reshape(-1)
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    if not (labels.shape == predictions.shape == scores.shape):
        raise InvalidArgumentError(
            f"labels, predictions and scores differ in length: "
            f"{labels.shape[0]}, {predictions.shape[0]}, {scores.shape[0]}"
        )
    if labels.size == 0:
        raise InvalidArgumentError("cannot score an empty test set")
    for name, values in (("labels", labels), ("predictions", predictions)):
        if not np.all((values == 0) | (values == 1)):
            raise InvalidArgumentError(f"{name} must be 0 (inlier) or 1 (outlier)")

    tn, fp, fn, tp = confusion_matrix(labels, predictions, labels=[0, 1]).ravel()
    acc = float(accuracy_score(labels, predictions))
    f1 = float(f1_score(labels, predictions, pos_label=1, zero_division=0))

    if np.unique(labels).size < 2:
        logger.warning("AUC undefined: test labels contain a single class")
        auc, defined = math.nan, False
    else:
        auc, defined = float(roc_auc_score(labels, -scores)), True

    return Metrics(
        acc=acc, f1=f1, auc=auc,
        tp=int(tp), fp=int(fp), fn=int(fn), tn=int(tn),
        auc_defined=defined,
    )
