import numpy as np
import pytest

from billiardwells import oned
from billiardwells.spectra import (SpectraError, SplittingRecord,
                                   attach_rectangle_labels, pair_states,
                                   rank_correlation, regularization_index,
                                   weyl_count, weyl_estimate)


def test_pairing_simple():
    recs = pair_states([1.0, 4.0], [1.1, 4.3])
    assert [(r.e_even, r.e_odd) for r in recs] == [(1.0, 1.1), (4.0, 4.3)]
    assert all(r.confidence == 1.0 for r in recs)
    assert recs[0].delta_e == pytest.approx(0.1)
    assert recs[1].e_mean == pytest.approx(4.15)


def test_pairing_flags_wide_splitting():
    recs = pair_states([1.0], [2.9])
    assert len(recs) == 1
    assert recs[0].confidence < 1.0
    assert not recs[0].confident


def test_pairing_rejects_large_mismatch():
    with pytest.raises(SpectraError):
        pair_states([1.0, 2.0, 3.0, 4.0], [1.1])
    # mismatch of 2 tolerated, extras dropped
    recs = pair_states([1.0, 2.0, 3.0, 4.0], [1.1, 2.1])
    assert len(recs) == 2


def test_pairing_requires_sorted_input():
    with pytest.raises(ValueError):
        pair_states([2.0, 1.0], [2.1, 1.1])


def test_pairing_stable_under_jitter():
    rng = np.random.default_rng(3)
    evens = np.sort(rng.uniform(1, 200, 40))
    odds = evens + rng.uniform(0.001, 0.01, 40)
    base = pair_states(list(evens), list(odds))
    jit = pair_states(list(evens + 1e-9), list(odds + 1e-9))
    assert [r.ordinal for r in base] == [r.ordinal for r in jit]
    assert [r.confident for r in base] == [r.confident for r in jit]


def test_weyl_formula_values():
    # leading term only
    assert weyl_count(9.6, 0.0, 800.0) == pytest.approx(611.15, abs=0.01)
    n_single = weyl_count(4.8, 0.0, 800.0)
    assert 290 < n_single < 320        # brackets "about 300 states"
    assert weyl_count(4.8, 8.8, 0.0) == 0.0


def test_weyl_estimate_uses_geometry(shapes):
    g = shapes["rectangle"]
    full = weyl_estimate(g, 300.0)
    single = weyl_estimate(g, 300.0, single_well=True)
    assert full == pytest.approx(weyl_count(9.6, 17.6, 300.0))
    assert single == pytest.approx(weyl_count(4.8, 8.8, 300.0))
    assert weyl_estimate(g, 0.0) == 0.0


def test_regularization_constant_deltas():
    recs = [SplittingRecord(k, 10.0 * k, 10.0 * k + 0.5) for k in range(1, 15)]
    points = regularization_index(recs, window_width=50.0, stride=25.0)
    assert points
    assert all(p.ratio == pytest.approx(1.0) for p in points)
    assert all(p.count >= 3 for p in points)


def test_regularization_two_decades():
    recs = []
    for k in range(12):
        delta = 1e-4 if k % 2 == 0 else 1e-2
        recs.append(SplittingRecord(k, 100.0 + k, 100.0 + k + delta))
    points = regularization_index(recs, window_width=50.0, stride=50.0)
    assert points[0].ratio == pytest.approx(100.0)


def test_regularization_sparse_windows_omitted():
    # two clusters far apart: the gap windows must be absent, not fabricated
    recs = [SplittingRecord(k, e, e + 0.01) for k, e in
            enumerate([1, 2, 3, 4, 5, 500, 501, 502, 503, 504])]
    points = regularization_index(recs, window_width=10.0, stride=10.0)
    centers = [p.center for p in points]
    assert all(c < 20 or c > 490 for c in centers)


def test_regularization_needs_confident_records():
    recs = [SplittingRecord(k, k, k + 0.01, confidence=0.2) for k in range(20)]
    with pytest.raises(ValueError):
        regularization_index(recs)


class _Summary:
    def __init__(self, ordinal, weighted, flagged=False):
        self.ordinal = ordinal
        self.weighted = weighted
        self.flagged = flagged


def test_rank_correlation_monotone_and_reversed():
    recs = [SplittingRecord(k, 10 + k, 10 + k + 1e-4 * (k + 1)) for k in range(12)]
    up = [_Summary(k, float(k + 1)) for k in range(12)]
    down = [_Summary(k, float(12 - k)) for k in range(12)]
    assert rank_correlation(recs, up) == pytest.approx(1.0)
    assert rank_correlation(recs, down) == pytest.approx(-1.0)


def test_rank_correlation_needs_ten_pairs():
    recs = [SplittingRecord(k, 10 + k, 10 + k + 1e-3) for k in range(5)]
    sums = [_Summary(k, float(k)) for k in range(5)]
    with pytest.raises(ValueError):
        rank_correlation(recs, sums)


def test_rank_correlation_skips_flagged():
    recs = [SplittingRecord(k, 10 + k, 10 + k + 1e-4 * (k + 1)) for k in range(12)]
    sums = [_Summary(k, float(k + 1)) for k in range(12)]
    sums[0] = _Summary(0, 1e9, flagged=True)   # would wreck monotonicity
    assert rank_correlation(recs, sums) == pytest.approx(1.0)


def test_attach_rectangle_labels_by_rank():
    modes = oned.separable_oracle_2d(2.0, 2.4, 0.1, 1000.0, 40.0)
    recs = [SplittingRecord(k, m.e_even - 0.01, m.e_odd - 0.01)
            for k, m in enumerate(sorted(modes, key=lambda m: m.e_mean))]
    attach_rectangle_labels(recs, modes)
    ordered = sorted(modes, key=lambda m: m.e_mean)
    assert [(r.n_x, r.n_y) for r in recs] == [(m.n_x, m.n_y) for m in ordered]
