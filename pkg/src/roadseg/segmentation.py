"""Otsu thresholding of transformed disparities into damaged / undamaged."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import DegenerateHistogram, EmptySelection
from .transform import TransformedMap

NBINS = 256


@dataclass(frozen=True, eq=False)
class Histogram256:
    counts: np.ndarray
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / NBINS

    def upper_edge(self, k: int) -> float:
        return self.lo + (k + 1) * self.width


@dataclass(frozen=True, eq=False)
class SegmentationResult:
    damage: np.ndarray
    region: np.ndarray
    threshold: float
    otsu_variance: float
    n_damaged: int
    n_undamaged: int
    degenerate: bool = False
    polarity: str = "below"


def quantize(values: np.ndarray, lo: float, hi: float, bins: int = NBINS) -> np.ndarray:
    idx = np.floor((values - lo) * (bins / (hi - lo))).astype(np.int64)
    return np.clip(idx, 0, bins - 1)


def histogram_of(values) -> Histogram256:
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptySelection("no values to histogram")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        counts = np.zeros(NBINS, dtype=np.int64)
        counts[0] = values.size
        return Histogram256(counts, lo, lo + 1.0)
    counts = np.bincount(quantize(values, lo, hi), minlength=NBINS)
    return Histogram256(counts.astype(np.int64), lo, hi)


def build_histogram(t: TransformedMap) -> Histogram256:
    return histogram_of(t.selected())


def otsu_threshold(h: Histogram256) -> tuple[int, float]:
    """Bin ``k`` maximising between-class variance of ``bins <= k`` vs ``bins > k``.

    Compared in exact integer arithmetic: with counts ``c``, totals ``N, S``
    and cumulative ``n0, s0`` the variance is ``(N s0 - n0 S)^2 / (N^2 n0 n1)``
    in bin units.  Ties go to the lowest bin.
    """
    counts = [int(c) for c in h.counts]
    total = sum(counts)
    if total < 2:
        raise DegenerateHistogram("need at least two samples")
    if sum(1 for c in counts if c) < 2:
        raise DegenerateHistogram("all mass in a single bin")
    s_total = sum(i * c for i, c in enumerate(counts))
    best_k, best_num, best_den = -1, -1, 1
    n0 = s0 = 0
    for k in range(len(counts) - 1):
        n0 += counts[k]
        s0 += k * counts[k]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (total * s0 - n0 * s_total) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    variance = best_num / (best_den * total * total)
    return best_k, variance


def segment(t: TransformedMap, polarity: str = "below") -> SegmentationResult:
    """Label valid road pixels as damaged by Otsu's threshold.

    ``polarity="below"`` marks pixels under the threshold (depressions such
    as potholes); ``"above"`` marks those at or over it.
    """
    if polarity not in ("below", "above"):
        raise ValueError(f"polarity must be 'below' or 'above', got {polarity!r}")
    region = t.valid
    h = build_histogram(t)
    try:
        k, var = otsu_threshold(h)
    except DegenerateHistogram:
        damage = np.zeros_like(region)
        thr = h.lo if polarity == "below" else h.hi
        n = int(region.sum())
        return SegmentationResult(damage, region, thr, 0.0, 0, n, True, polarity)
    thr = h.upper_edge(k)
    if polarity == "below":
        damage = region & (t.values < thr)
    else:
        damage = region & (t.values >= thr)
    nd = int(damage.sum())
    return SegmentationResult(damage, region, thr, var, nd, int(region.sum()) - nd, False, polarity)


def clean_mask(s: SegmentationResult, min_area: int = 0) -> SegmentationResult:
    """Drop 4-connected damage components smaller than ``min_area`` pixels."""
    if min_area < 0:
        raise ValueError("min_area must be >= 0")
    if min_area == 0 or s.n_damaged == 0:
        return s
    labels, _ = ndimage.label(s.damage)
    sizes = np.bincount(labels.ravel())
    keep = sizes >= min_area
    keep[0] = False
    damage = keep[labels]
    nd = int(damage.sum())
    return replace(s, damage=damage, n_damaged=nd, n_undamaged=s.n_damaged + s.n_undamaged - nd)
