import logging
import math

import numpy as np
import pytest

from odhd_cim.data import compute_metrics
from odhd_cim.errors import InvalidArgumentError


def test_confusion_counts():
    labels = [1, 1, 1, 0, 0, 0, 0, 0, 0, 0]
    predictions = [1, 1, 0, 1, 0, 0, 0, 0, 0, 0]
    scores = np.linspace(0.0, 1.0, 10)
    m = compute_metrics(labels, predictions, scores)
    assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 1, 6)
    assert m.acc == pytest.approx(0.8)
    assert m.f1 == pytest.approx(2 / 3)


def test_perfect_ranking():
    labels = [0, 0, 0, 1, 1]
    scores = [0.9, 0.8, 0.7, 0.1, 0.2]  # outliers score low
    m = compute_metrics(labels, [0, 0, 0, 1, 1], scores)
    assert m.auc == 1.0
    assert m.acc == 1.0
    assert m.f1 == 1.0


def test_single_class_auc_undefined(caplog):
    with caplog.at_level(logging.WARNING):
        m = compute_metrics([0, 0, 0], [0, 1, 0], [0.5, 0.1, 0.6])
    assert math.isnan(m.auc)
    assert not m.auc_defined
    assert m.to_dict()["auc"] is None
    assert "AUC undefined" in caplog.text


def test_no_predicted_outliers_gives_zero_f1():
    m = compute_metrics([0, 1], [0, 0], [0.5, 0.4])
    assert m.f1 == 0.0
    assert m.auc == 1.0


def test_random_labels_average_half(rng):
    aucs = []
    for _ in range(1000):
        labels = np.array([0] * 40 + [1] * 10)
        rng.shuffle(labels)
        aucs.append(compute_metrics(labels, np.zeros(50, dtype=int), rng.normal(size=50)).auc)
    assert abs(np.mean(aucs) - 0.5) < 0.1


def test_sample_order_does_not_matter(rng):
    labels = rng.integers(0, 2, size=40)
    labels[:2] = [0, 1]
    predictions = rng.integers(0, 2, size=40)
    scores = rng.normal(size=40)
    order = rng.permutation(40)
    a = compute_metrics(labels, predictions, scores)
    b = compute_metrics(labels[order], predictions[order], scores[order])
    assert (a.tp, a.fp, a.fn, a.tn) == (b.tp, b.fp, b.fn, b.tn)
    assert a.acc == b.acc
    assert a.f1 == pytest.approx(b.f1)
    assert a.auc == pytest.approx(b.auc)


def test_input_checks():
    with pytest.raises(InvalidArgumentError):
        compute_metrics([0, 1], [0], [0.1, 0.2])
    with pytest.raises(InvalidArgumentError):
        compute_metrics([], [], [])
    with pytest.raises(InvalidArgumentError):
        compute_metrics([0, 2], [0, 1], [0.1, 0.2])
