from collections import deque
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roadseg.core import DisparityMap
from roadseg.errors import DegenerateHistogram, EmptySelection
from roadseg.segmentation import (NBINS, Histogram256, clean_mask, histogram_of, otsu_threshold,
                                  quantize, segment)
from roadseg.transform import TransformedMap


def tmap(values, valid=None):
    values = np.asarray(values, dtype=float)
    if valid is None:
        valid = np.ones(values.shape, bool)
    return TransformedMap(DisparityMap(values, valid), 0.0, None)


def brute_otsu(counts):
    """Exact between-class variance over every split, lowest index on ties."""
    total = sum(counts)
    mean = Fraction(sum(i * c for i, c in enumerate(counts)), total)
    best, arg = Fraction(-1), None
    for k in range(len(counts) - 1):
        n0 = sum(counts[: k + 1])
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        m0 = Fraction(sum(i * counts[i] for i in range(k + 1)), n0)
        m1 = Fraction(sum(i * counts[i] for i in range(k + 1, len(counts))), n1)
        var = Fraction(n0, total) * (m0 - mean) ** 2 + Fraction(n1, total) * (m1 - mean) ** 2
        if var > best:
            best, arg = var, k
    return arg, best


def test_two_spikes():
    counts = np.zeros(NBINS, np.int64)
    counts[10], counts[200] = 5, 5
    k, var = otsu_threshold(Histogram256(counts, 0.0, 256.0))
    assert k == 10  # every split in [10, 199] ties; lowest wins
    assert var == pytest.approx(95.0 ** 2)


def test_degenerate_histograms():
    counts = np.zeros(NBINS, np.int64)
    counts[7] = 40
    with pytest.raises(DegenerateHistogram):
        otsu_threshold(Histogram256(counts, 0.0, 1.0))
    counts[7] = 1
    with pytest.raises(DegenerateHistogram):
        otsu_threshold(Histogram256(counts, 0.0, 1.0))


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=NBINS, max_size=NBINS).filter(lambda c: sum(1 for x in c if x) >= 2))
def test_matches_exact_brute_force(counts):
    k, var = otsu_threshold(Histogram256(np.array(counts, np.int64), 0.0, 1.0))
    ref_k, ref_var = brute_otsu(counts)
    assert k == ref_k
    assert var == pytest.approx(float(ref_var), rel=1e-12)


def test_quantize_edges():
    idx = quantize(np.array([0.0, 0.5, 255.999, 256.0]), 0.0, 256.0)
    assert idx.tolist() == [0, 0, 255, 255]


def test_histogram_constant_values():
    h = histogram_of([3.0, 3.0, 3.0])
    assert h.counts[0] == 3 and h.counts.sum() == 3
    assert (h.lo, h.hi) == (3.0, 4.0)
    with pytest.raises(EmptySelection):
        histogram_of([])


def test_segment_two_levels():
    vals = np.full((10, 10), 8.0)
    vals[2:4, 2:5] = 1.0
    s = segment(tmap(vals))
    assert s.damage.sum() == 6 and s.n_damaged == 6 and s.n_undamaged == 94
    assert 1.0 < s.threshold <= 8.0
    up = segment(tmap(vals), polarity="above")
    assert up.n_damaged == 94
    assert not (s.damage & up.damage).any()


def test_segment_only_valid_pixels():
    vals = np.full((4, 4), 5.0)
    vals[0, 0] = 0.0
    valid = np.ones((4, 4), bool)
    valid[3] = False
    s = segment(tmap(vals, valid))
    assert not s.damage[3].any()
    assert s.n_damaged + s.n_undamaged == 12


def test_segment_flat_map_is_degenerate():
    s = segment(tmap(np.full((5, 5), 2.0)))
    assert s.degenerate and s.n_damaged == 0 and s.n_undamaged == 25
    assert s.threshold == 2.0


def test_segment_bad_polarity():
    with pytest.raises(ValueError):
        segment(tmap(np.arange(4.0).reshape(2, 2)), polarity="left")


def test_threshold_is_bin_upper_edge():
    rng = np.random.default_rng(0)
    vals = np.concatenate([rng.uniform(0, 3, 500), rng.uniform(7, 10, 500)]).reshape(25, 40)
    s = segment(tmap(vals))
    h = histogram_of(vals)
    k, _ = otsu_threshold(h)
    assert s.threshold == h.upper_edge(k)
    assert s.n_damaged == 500


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(-64, 64))
def test_shift_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    # dyadic values keep the shifted histogram bit-identical
    vals = 64 + rng.integers(0, 2048, (12, 12)) / 8.0
    a = segment(tmap(vals))
    b = segment(tmap(vals + shift))
    assert np.array_equal(a.damage, b.damage)
    if not a.degenerate:
        assert b.threshold == a.threshold + shift


def flood_fill_keep(damage, min_area):
    h, w = damage.shape
    seen = np.zeros_like(damage)
    out = np.zeros_like(damage)
    for y in range(h):
        for x in range(w):
            if damage[y, x] and not seen[y, x]:
                comp, q = [], deque([(y, x)])
                seen[y, x] = True
                while q:
                    cy, cx = q.popleft()
                    comp.append((cy, cx))
                    for ny, nx in ((cy + 1, cx), (cy - 1, cx), (cy, cx + 1), (cy, cx - 1)):
                        if 0 <= ny < h and 0 <= nx < w and damage[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            q.append((ny, nx))
                if len(comp) >= min_area:
                    for p in comp:
                        out[p] = True
    return out


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 6))
def test_clean_mask_matches_flood_fill(seed, min_area):
    rng = np.random.default_rng(seed)
    vals = np.where(rng.random((15, 15)) < 0.35, 1.0, 9.0)
    s = segment(tmap(vals))
    c = clean_mask(s, min_area)
    assert np.array_equal(c.damage, flood_fill_keep(s.damage, min_area))
    assert c.n_damaged + c.n_undamaged == s.n_damaged + s.n_undamaged


def test_clean_mask_diagonal_not_connected():
    vals = np.full((4, 4), 9.0)
    vals[0, 0] = vals[1, 1] = 1.0
    c = clean_mask(segment(tmap(vals)), 2)
    assert c.n_damaged == 0
    with pytest.raises(ValueError):
        clean_mask(segment(tmap(vals)), -1)
