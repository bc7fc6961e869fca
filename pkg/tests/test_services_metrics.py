import numpy as np
import pytest

from app.core.errors import DegenerateFitError, InputError
from app.models.keys import BinaryKey
from app.models.metrics import HammingStats
from app.services.metrics.metrics_service import (
    eer_fit, hamming_frac, hamming_stats, histogram_frame, key_matrix_stats, key_uniformity, pair_indices,
    pairwise_fractions,
)


def _stats(mean, std, count=1000):
    return HammingStats(mean=mean, std=std, count=count)


def test_hamming_frac():
    a = np.array([0, 1, 1, 0], dtype=np.uint8)
    b = np.array([1, 1, 0, 0], dtype=np.uint8)
    assert hamming_frac(a, b) == 0.5
    assert hamming_frac(a, a) == 0.0
    key = BinaryKey(bits=b, bits_per_weight=2, weight_count=2)
    assert hamming_frac(key, a) == 0.5


def test_hamming_frac_errors():
    with pytest.raises(InputError):
        hamming_frac(np.zeros(3), np.zeros(4))
    with pytest.raises(InputError):
        hamming_frac(np.zeros(0), np.zeros(0))


def test_hamming_frac_is_a_metric(rng):
    for _ in range(200):
        a, b, c = rng.integers(0, 2, size=(3, 64), dtype=np.uint8)
        assert hamming_frac(a, b) == hamming_frac(b, a)
        assert hamming_frac(a, a) == 0.0
        assert hamming_frac(a, c) <= hamming_frac(a, b) + hamming_frac(b, c) + 1e-12
        if not np.array_equal(a, b):
            assert hamming_frac(a, b) > 0.0


def test_pair_indices_all_pairs():
    i, j = pair_indices(5)
    assert len(i) == 10
    assert np.all(i < j)


def test_pair_indices_capped_subsample():
    i, j = pair_indices(1000, max_pairs=500, seed=3)
    assert len(i) == 500
    assert np.all(i < j) and j.max() < 1000
    again = pair_indices(1000, max_pairs=500, seed=3)
    assert np.array_equal(i, again[0]) and np.array_equal(j, again[1])
    with pytest.raises(InputError):
        pair_indices(1)


def test_pairwise_fractions_matches_hamming_frac(rng):
    keys = rng.integers(0, 2, size=(6, 40), dtype=np.uint8)
    fractions = pairwise_fractions(keys)
    i, j = np.triu_indices(6, k=1)
    expected = [hamming_frac(keys[a], keys[b]) for a, b in zip(i, j)]
    assert fractions.tolist() == pytest.approx(expected)


def test_hamming_stats_and_histogram():
    stats = hamming_stats([0.1, 0.3], bins=10)
    assert stats.mean == pytest.approx(0.2)
    assert stats.std == pytest.approx(0.1)
    assert stats.count == 2
    assert sum(stats.histogram) == 2
    frame = histogram_frame(stats)
    assert list(frame.columns) == ["bin_left", "count"]
    assert len(frame) == 10
    with pytest.raises(InputError):
        hamming_stats([])


def test_identical_keys_have_zero_distance():
    stats = key_matrix_stats(np.ones((4, 16), dtype=np.uint8))
    assert stats.mean == 0.0 and stats.std == 0.0 and stats.count == 6


def test_eer_closed_form():
    report = eer_fit(_stats(0.22, 0.02), _stats(0.46, 0.02))
    assert report.threshold == pytest.approx(0.34)
    assert report.eer == pytest.approx(9.866e-10, rel=1e-3)
    assert report.below_floor
    assert not report.degenerate


def test_eer_threshold_weights_by_spread():
    report = eer_fit(_stats(0.2, 0.01), _stats(0.5, 0.05))
    assert report.threshold == pytest.approx((0.2 * 0.05 + 0.5 * 0.01) / 0.06)
    assert report.threshold < 0.35


def test_eer_overlapping_distributions():
    report = eer_fit(_stats(0.4, 0.05), _stats(0.4, 0.05))
    assert report.eer == pytest.approx(0.5)
    assert not report.below_floor


def test_eer_invariant_under_swapped_mirrored_classes():
    intra, inter = _stats(0.18, 0.03), _stats(0.47, 0.016)
    report = eer_fit(intra, inter)
    mirrored = eer_fit(_stats(1.0 - inter.mean, inter.std), _stats(1.0 - intra.mean, intra.std))
    assert mirrored.eer == pytest.approx(report.eer, rel=1e-9)
    assert mirrored.threshold == pytest.approx(1.0 - report.threshold)


def test_eer_degenerate_fit():
    report = eer_fit(_stats(0.0, 0.0), _stats(0.46, 0.02))
    assert report.degenerate
    assert report.eer == 0.0
    assert report.threshold == pytest.approx(0.0)
    same = eer_fit(_stats(0.3, 0.0), _stats(0.3, 0.0))
    assert same.eer == 0.5
    with pytest.raises(DegenerateFitError):
        eer_fit(_stats(0.0, 0.0), _stats(0.46, 0.02), strict=True)


def test_key_uniformity_extremes(rng):
    constant = key_uniformity(np.zeros((10, 8), dtype=np.uint8))
    assert constant.bit_aliasing == pytest.approx(1.0)
    assert constant.entropy == pytest.approx(0.0)
    balanced = key_uniformity(np.array([[0, 1], [1, 0]], dtype=np.uint8))
    assert balanced.bit_aliasing == pytest.approx(0.0)
    assert balanced.entropy == pytest.approx(1.0)
    assert balanced.key_count == 2 and balanced.key_bits == 2
