import numpy as np
import pytest

from odhd_cim.errors import DomainError, InvalidArgumentError
from odhd_cim.hdc import (
    Hypervector,
    Kind,
    bind,
    bundle,
    cosine_scores,
    cosine_similarity,
    dot_scores,
    dot_similarity,
    new_random_bipolar,
    permute,
)


def hv(*values, kind=Kind.ACCUMULATOR):
    return Hypervector(np.array(values), kind)


def test_random_bipolar_elements(rng):
    h = new_random_bipolar(1000, rng)
    assert h.dims == 1000
    assert h.kind is Kind.BIPOLAR
    assert set(np.unique(h.elems)) <= {-1, 1}


def test_random_bipolar_rejects_zero_dims(rng):
    with pytest.raises(InvalidArgumentError):
        new_random_bipolar(0, rng)


def test_bipolar_kind_is_checked():
    with pytest.raises(InvalidArgumentError):
        hv(1, 0, -1, kind=Kind.BIPOLAR)


def test_elements_are_read_only():
    h = hv(1, 2, 3)
    with pytest.raises(ValueError):
        h.elems[0] = 5


def test_bundle_is_elementwise_sum():
    assert bundle(hv(1, -1, 1), hv(1, 1, -1)) == hv(2, 0, 0)


def test_bundle_with_negation_cancels(rng):
    a = new_random_bipolar(64, rng)
    neg = Hypervector(-a.elems)
    assert np.all(bundle(a, neg).elems == 0)


def test_bind_is_elementwise_product():
    a = hv(1, -1, 1, -1, kind=Kind.BIPOLAR)
    b = hv(1, 1, -1, -1, kind=Kind.BIPOLAR)
    out = bind(a, b)
    assert out == hv(1, -1, -1, 1)
    assert out.kind is Kind.BIPOLAR
    assert bind(out, b) == a


def test_permute_rotates_right():
    h = hv(1, 2, 3, 4, 5)
    assert permute(h, 1) == hv(5, 1, 2, 3, 4)
    assert permute(h, 2) == hv(4, 5, 1, 2, 3)
    assert permute(h, 5) == h
    assert permute(h, 7) == permute(h, 2)
    assert permute(h, -1) == hv(2, 3, 4, 5, 1)


def test_dimension_mismatch():
    with pytest.raises(InvalidArgumentError):
        bundle(hv(1, 2), hv(1, 2, 3))
    with pytest.raises(InvalidArgumentError):
        dot_similarity(hv(1, 2), hv(1, 2, 3))


def test_similarities():
    a = hv(1, 1, -1, -1)
    b = hv(1, -1, 1, -1)
    assert dot_similarity(a, b) == 0
    assert cosine_similarity(a, b) == 0.0
    assert cosine_similarity(a, a) == pytest.approx(1.0)
    assert cosine_similarity(a, hv(-1, -1, 1, 1)) == pytest.approx(-1.0)
    assert dot_similarity(hv(2, 0, 3), hv(1, 5, 2)) == 8


def test_cosine_of_zero_vector_raises():
    with pytest.raises(DomainError):
        cosine_similarity(hv(0, 0, 0), hv(1, 2, 3))
    with pytest.raises(DomainError):
        cosine_scores(np.array([[1, 2, 3]]), np.zeros(3, dtype=np.int64))


def test_random_pairs_are_quasi_orthogonal(rng):
    cosines = np.array([
        cosine_similarity(new_random_bipolar(10_000, rng), new_random_bipolar(10_000, rng))
        for _ in range(1000)
    ])
    assert np.mean(np.abs(cosines)) < 0.02
    assert np.max(np.abs(cosines)) < 0.06


def test_batch_scores_match_scalar_forms(rng):
    rows = rng.integers(-10, 11, size=(20, 50))
    rows[rows[:, 0] == 0, 0] = 1
    h = rng.integers(-30, 31, size=50)
    h[0] = 7
    h_vec = Hypervector(h)
    cos = cosine_scores(rows, h)
    dots = dot_scores(rows, h)
    for i, row in enumerate(rows):
        assert cos[i] == cosine_similarity(Hypervector(row), h_vec)
        assert dots[i] == dot_similarity(Hypervector(row), h_vec)


def test_permutations_compose(rng):
    h = Hypervector(rng.integers(-50, 51, size=997))
    for _ in range(200):
        a, b = (int(v) for v in rng.integers(0, 5000, size=2))
        assert permute(permute(h, a), b) == permute(h, (a + b) % h.dims)


def test_bundle_is_associative_and_commutative(rng):
    for _ in range(100):
        a, b, c = (Hypervector(rng.integers(-20, 21, size=256)) for _ in range(3))
        assert bundle(bundle(a, b), c) == bundle(a, bundle(b, c))
        assert bundle(a, b) == bundle(b, a)


def test_cosine_ignores_positive_scale(rng):
    for _ in range(100):
        a = Hypervector(rng.integers(-20, 21, size=512))
        b = Hypervector(rng.integers(-20, 21, size=512))
        if not a.elems.any() or not b.elems.any():
            continue
        c = int(rng.integers(1, 50))
        scaled = Hypervector(c * a.elems)
        assert cosine_similarity(scaled, b) == pytest.approx(cosine_similarity(a, b), rel=1e-12, abs=1e-15)
        assert dot_similarity(scaled, b) == c * dot_similarity(a, b)
