import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from odhd_cim.detector import (
    DetectorConfig,
    Label,
    OneClassModel,
    Quantizer,
    SeedSet,
    Variant,
    compute_threshold,
    detect,
    detect_batch,
    encode,
    encode_batch,
    fine_tune,
    fit,
    fit_quantizer,
    generate_seeds,
    mean_absolute_deviation,
    pad_to_power_of_two,
    threshold_from_scores,
    train,
)
from odhd_cim.detector.pipeline import encoded_dtype
from odhd_cim.errors import InvalidArgumentError
from odhd_cim.hdc import Hypervector, bundle, dot_similarity, new_random_bipolar


@pytest.fixture
def tiny_seeds():
    return SeedSet(np.array([[1, 1, 1, 1], [1, -1, 1, -1]]), flips=1)


@pytest.fixture
def tiny_quantizer():
    return Quantizer(2, np.array([0.0, 0.0]), np.array([10.0, 10.0]))


class TestEncode:
    def test_hand_computed_example(self, tiny_seeds, tiny_quantizer):
        # levels (1, 2): s_1 + rotate(s_2, 1) = <1,1,1,1> + <-1,1,-1,1>
        h = encode(tiny_seeds, tiny_quantizer, [0.0, 10.0])
        assert h.to_list() == [0, 2, 0, 2]

    def test_single_feature_is_its_seed(self, rng):
        seeds = generate_seeds(100, 4, rng)
        q = Quantizer(4, np.array([0.0]), np.array([4.0]))
        assert np.array_equal(encode(seeds, q, [2.5]).elems, seeds.seeds[2])

    def test_elements_bounded_by_feature_count(self, rng):
        X = rng.normal(size=(50, 12))
        seeds = generate_seeds(500, 6, rng)
        q = fit_quantizer(X, 6)
        encoded = encode_batch(seeds, q, X)
        assert np.abs(encoded).max() <= 12
        # parity of each element matches m
        assert np.all(encoded % 2 == 0)

    def test_batch_matches_single(self, rng):
        X = rng.normal(size=(30, 7))
        seeds = generate_seeds(256, 5, rng)
        q = fit_quantizer(X, 5)
        batch = encode_batch(seeds, q, X)
        for i, x in enumerate(X):
            assert np.array_equal(batch[i], encode(seeds, q, x).elems)

    def test_distinct_levels_give_distinct_encodings(self, rng):
        k, m = 10, 8
        seeds = generate_seeds(10_000, k, rng)
        # unit-width intervals: feature value v quantizes to level v + 1
        q = fit_quantizer(np.array([[0.0] * m, [float(k)] * m]), k)
        a = rng.integers(0, k, size=(1000, m))
        b = rng.integers(0, k, size=(1000, m))
        same = np.all(a == b, axis=1)
        b[same, 0] = (b[same, 0] + 1) % k

        encoded_a = encode_batch(seeds, q, a.astype(np.float64))
        encoded_b = encode_batch(seeds, q, b.astype(np.float64))
        assert np.all(np.any(encoded_a != encoded_b, axis=1))

    @pytest.mark.parametrize("m, dtype", [(1, np.int8), (127, np.int8), (128, np.int16), (40_000, np.int32)])
    def test_encoded_dtype_holds_feature_count(self, m, dtype):
        assert encoded_dtype(m) == np.dtype(dtype)
        assert np.iinfo(encoded_dtype(m)).min <= -m


class TestTrain:
    def test_single_row_is_identity(self, rng):
        h = new_random_bipolar(64, rng)
        assert train([h]) == Hypervector(h.elems)

    def test_opposites_cancel(self, rng):
        h = new_random_bipolar(64, rng)
        assert np.all(train([h, Hypervector(-h.elems)]).elems == 0)

    def test_order_does_not_matter(self, rng):
        rows = rng.integers(-5, 6, size=(10, 32))
        assert train(rows) == train(rows[::-1])

    def test_empty_set(self):
        with pytest.raises(InvalidArgumentError):
            train([])


class TestThreshold:
    S = [0.9, 0.8, 1.0]

    def test_std_threshold(self):
        R = threshold_from_scores(self.S, Variant.SOFTWARE, 2.0)
        assert R == pytest.approx(0.9 + 2 * math.sqrt(0.02 / 3), abs=1e-9)
        assert R == pytest.approx(1.0633, abs=1e-4)

    def test_mad_threshold(self):
        assert mean_absolute_deviation(self.S) == pytest.approx(0.2 / 3, abs=1e-12)
        R = threshold_from_scores(self.S, Variant.CIM, 2.0)
        assert R == pytest.approx(0.9 + 0.4 / 3, abs=1e-9)

    def test_constant_scores(self):
        assert threshold_from_scores([4, 4, 4], Variant.CIM) == 4.0
        assert threshold_from_scores([0.5, 0.5], Variant.SOFTWARE) == pytest.approx(0.5)
        assert mean_absolute_deviation([7, 7]) == 0.0

    def test_integer_scores_are_exact(self):
        assert threshold_from_scores(np.array([3, 5]), Variant.CIM) == 6.0
        assert threshold_from_scores(np.array([3, 4]), Variant.CIM) == 4.5
        # floor shifts: mean 7 >> 1 = 3, MAD (0 + 1) >> 1 = 0
        assert threshold_from_scores(np.array([3, 4]), Variant.CIM, hardware_division=True) == 3.0

    def test_hardware_division_needs_power_of_two(self):
        with pytest.raises(InvalidArgumentError):
            threshold_from_scores(np.array([1, 2, 3]), Variant.CIM, hardware_division=True)

    def test_mad_never_exceeds_std(self, rng):
        for _ in range(1000):
            S = rng.normal(size=rng.integers(1, 40)) * rng.uniform(0.1, 10)
            assert mean_absolute_deviation(S) <= np.std(S) + 1e-12

    def test_empty_scores(self):
        with pytest.raises(InvalidArgumentError):
            threshold_from_scores([], Variant.SOFTWARE)

    def test_compute_threshold_returns_scores(self, rng):
        rows = rng.integers(-3, 4, size=(8, 16))
        h = train(rows)
        R, S = compute_threshold(h, rows, Variant.CIM)
        assert list(S) == [int(np.dot(r, h.elems)) for r in rows]
        assert R == threshold_from_scores(S, Variant.CIM)


class TestPadding:
    def test_pads_to_next_power_of_two(self, rng):
        rows = np.arange(378 * 2, dtype=float).reshape(378, 2)
        padded = pad_to_power_of_two(rows, rng)
        assert padded.shape == (512, 2)
        assert np.array_equal(padded[:378], rows)
        extra = padded[378:, 0]
        assert len(set(extra.tolist())) == 134
        assert set(extra.tolist()) <= set(rows[:, 0].tolist())

    def test_power_of_two_is_unchanged(self, rng):
        rows = np.ones((8, 3))
        assert pad_to_power_of_two(rows, rng) is rows
        assert pad_to_power_of_two(np.ones((1, 3)), rng).shape == (1, 3)

    def test_cim_fit_counts_padded_rows(self, rng):
        X = rng.normal(size=(5, 3))
        model = fit(X, DetectorConfig(dims=64, levels=4, epochs=0, variant=Variant.CIM), rng)
        # every padded row is some training row, so |H_OC| <= 8 * m
        assert np.abs(model.h_oc.elems).max() <= 8 * 3


class TestFineTune:
    def test_dot_update_is_bilinear(self, rng):
        for _ in range(100):
            h_oc = Hypervector(rng.integers(-20, 21, size=128))
            h_t = new_random_bipolar(128, rng)
            before = dot_similarity(h_t, h_oc)
            after = dot_similarity(h_t, bundle(h_oc, h_t))
            assert after - before == dot_similarity(h_t, h_t) > 0

    def test_zero_epochs_returns_model(self, rng):
        X = rng.normal(size=(20, 4))
        model = fit(X, DetectorConfig(dims=64, levels=4, epochs=0), rng)
        assert fine_tune(model, encode_batch(model.seeds, model.quantizer, X), 0) is model
        assert model.threshold_history == (model.threshold,)

    def test_identical_rows_are_a_fixed_point(self, rng):
        X = np.tile(rng.normal(size=(1, 5)), (16, 1))
        for variant in Variant:
            model = fit(X, DetectorConfig(dims=100, levels=4, epochs=3, variant=variant), rng)
            assert model.updates_per_epoch == (0, 0, 0)
            labels, _ = detect_batch(model, X)
            assert np.all(labels == Label.INLIER)

    def test_narrow_encoded_rows_match_wide_rows(self, rng):
        X = rng.normal(size=(40, 12))
        for variant in Variant:
            model = fit(X, DetectorConfig(dims=2000, levels=6, epochs=0, variant=variant), rng)
            narrow = encode_batch(model.seeds, model.quantizer, X)
            wide = narrow.astype(np.int64)
            assert narrow.dtype == np.int8

            R_narrow, S_narrow = compute_threshold(train(narrow), narrow, variant)
            R_wide, S_wide = compute_threshold(train(wide), wide, variant)
            assert R_narrow == R_wide
            assert np.array_equal(S_narrow, S_wide)

            tuned_narrow = fine_tune(model, narrow, 3)
            tuned_wide = fine_tune(model, wide, 3)
            assert tuned_narrow.h_oc == tuned_wide.h_oc
            assert tuned_narrow.threshold_history == tuned_wide.threshold_history

    def test_history_tracks_every_epoch(self, synthetic, rng):
        X = synthetic.features[synthetic.labels == 0]
        model = fit(X, DetectorConfig(dims=1000, levels=8, epochs=4), rng)
        assert len(model.updates_per_epoch) == 4
        assert len(model.threshold_history) == 5
        assert model.threshold_history[-1] == model.threshold
        assert model.epochs == 4

    def test_negative_epochs(self, rng):
        X = rng.normal(size=(4, 2))
        model = fit(X, DetectorConfig(dims=16, levels=2, epochs=0), rng)
        with pytest.raises(InvalidArgumentError):
            fine_tune(model, encode_batch(model.seeds, model.quantizer, X), -1)


class TestDetect:
    def test_score_equal_to_threshold_is_inlier(self, rng):
        X = rng.normal(size=(16, 3))
        for variant in Variant:
            model = fit(X, DetectorConfig(dims=64, levels=4, epochs=1, variant=variant), rng)
            _, score = detect(model, X[0])
            at_threshold = dataclasses.replace(model, threshold=float(score))
            assert detect(at_threshold, X[0])[0] is Label.INLIER

    def test_orthogonal_query_is_outlier(self, tiny_seeds, tiny_quantizer):
        model = OneClassModel(
            h_oc=Hypervector(np.array([2, 0, 2, 0])),
            threshold=1.0,
            seeds=tiny_seeds,
            quantizer=tiny_quantizer,
            variant=Variant.CIM,
        )
        label, score = detect(model, [0.0, 10.0])
        assert score == 0
        assert label is Label.OUTLIER

    def test_batch_matches_single(self, synthetic, rng):
        X = synthetic.features[synthetic.labels == 0][:64]
        for variant in Variant:
            model = fit(X, DetectorConfig(dims=512, levels=8, epochs=2, variant=variant), rng)
            labels, scores = detect_batch(model, synthetic.features[:40])
            for i, x in enumerate(synthetic.features[:40]):
                label, score = detect(model, x)
                assert labels[i] == int(label)
                assert scores[i] == score

    def test_fit_is_deterministic(self, synthetic):
        X = synthetic.features[synthetic.labels == 0]
        for variant in Variant:
            cfg = DetectorConfig(dims=1000, levels=10, epochs=3, variant=variant)
            a = fit(X, cfg, np.random.default_rng(11))
            b = fit(X, cfg, np.random.default_rng(11))
            assert a.h_oc == b.h_oc
            assert a.threshold == b.threshold
            assert np.array_equal(a.seeds.seeds, b.seeds.seeds)


# ============================================================================
# Plain-Python reference on a tiny instance
# ============================================================================

def reference_fit(X, queries, dims, k, epochs, variant, seed):
    """Straight loops over lists, sharing only the random draws with fit()."""
    rng = np.random.default_rng(seed)
    s1 = [int(v) for v in rng.choice(np.array([-1, 1]), size=dims)]
    order = [int(v) for v in rng.permutation(dims)]
    flips = dims // (2 * k)
    seeds = [s1]
    for i in range(1, k):
        s = list(seeds[-1])
        for p in order[(i - 1) * flips:i * flips]:
            s[p] = -s[p]
        seeds.append(s)

    m = len(X[0])
    lo = [min(row[j] for row in X) for j in range(m)]
    hi = [max(row[j] for row in X) for j in range(m)]

    def level(v, j):
        width = (hi[j] - lo[j]) / k
        if width == 0:
            return 1
        return min(k, max(1, 1 + math.floor((v - lo[j]) / width)))

    def encode_row(row):
        h = [0] * dims
        for i, v in enumerate(row):
            s = seeds[level(v, i) - 1]
            for d in range(dims):
                h[d] += s[(d - i) % dims]
        return h

    def dot(a, b):
        return sum(x * y for x, y in zip(a, b))

    def sim(a, b):
        if variant is Variant.SOFTWARE:
            return max(-1.0, min(1.0, dot(a, b) / math.sqrt(dot(a, a) * dot(b, b))))
        return dot(a, b)

    def threshold(h, rows):
        S = [sim(r, h) for r in rows]
        n = len(S)
        if variant is Variant.SOFTWARE:
            mu = sum(S) / n
            return mu + 2 * math.sqrt(sum((s - mu) ** 2 for s in S) / n)
        mu = Fraction(sum(S), n)
        return float(mu + 2 * sum(abs(s - mu) for s in S) / n)

    rows = [encode_row(r) for r in X]
    h = [sum(col) for col in zip(*rows)]
    R = threshold(h, rows)
    for _ in range(epochs):
        for r in rows:
            if sim(r, h) < R:
                h = [a + b for a, b in zip(h, r)]
        R = threshold(h, rows)

    labels = [0 if sim(encode_row(q), h) >= R else 1 for q in queries]
    return h, [sim(r, h) for r in rows], R, labels


@pytest.mark.parametrize("variant", list(Variant))
def test_matches_plain_reference(variant):
    data = np.random.default_rng(5)
    X = data.normal(size=(8, 3))
    queries = np.concatenate([data.normal(size=(6, 3)), data.normal(size=(4, 3)) + 3.0])

    model = fit(X, DetectorConfig(dims=32, levels=4, epochs=2, variant=variant), np.random.default_rng(123))
    labels, _ = detect_batch(model, queries)

    h, S, R, ref_labels = reference_fit(X.tolist(), queries.tolist(), 32, 4, 2, variant, 123)
    assert model.h_oc.to_list() == h
    _, scores = compute_threshold(model.h_oc, encode_batch(model.seeds, model.quantizer, X), variant)
    if variant is Variant.CIM:
        assert scores.tolist() == S
    else:
        assert scores.tolist() == pytest.approx(S, rel=1e-12)
    assert model.threshold == pytest.approx(R, rel=1e-12)
    assert labels.tolist() == ref_labels
