"""Accuracy measures, method comparison and the v-disparity image."""
from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import asdict, dataclass

import numpy as np

from .baselines import gd_solve, gss_solve
from .core import DisparityMap, RoadMask, selection
from .errors import DimensionMismatch, EmptySelection
from .moments import accumulate
from .solver import compute_w, estimate_from_moments, fit_model, solve_roll_angle
from .synth import KAPPA_GRID, benchmark_suite, generate
from .transform import TransformedMap, transform_map

METHODS = ("closed-form", "gd", "gss")


@dataclass(frozen=True)
class PixelMetrics:
    precision: float
    recall: float
    f_score: float
    iou: float
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class SigmaReport:
    sigma: float
    m: int


def _ratio(num: int, den: int, errors: int) -> float:
    if den:
        return num / den
    return 1.0 if errors == 0 else 0.0


def metrics_from_counts(tp: int, fp: int, fn: int, tn: int) -> PixelMetrics:
    """Undefined ratios (zero denominator) are 1 when there is nothing to
    get wrong and 0 otherwise."""
    p = _ratio(tp, tp + fp, fp)
    r = _ratio(tp, tp + fn, fn)
    f = 2 * p * r / (p + r) if p + r else 0.0
    iou = _ratio(tp, tp + fp + fn, fp + fn)
    acc = _ratio(tp + tn, tp + fp + fn + tn, fp + fn)
    return PixelMetrics(p, r, f, iou, acc, tp, fp, fn, tn)


def pixel_metrics(pred, truth, region=None) -> PixelMetrics:
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.shape != truth.shape:
        raise DimensionMismatch(f"prediction {pred.shape} vs truth {truth.shape}")
    if region is None:
        region = np.ones(pred.shape, dtype=bool)
    else:
        region = np.asarray(region, dtype=bool)
        if region.shape != pred.shape:
            raise DimensionMismatch(f"region {region.shape} vs masks {pred.shape}")
    p, t = pred[region], truth[region]
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = int(p.size) - tp - fp - fn
    return metrics_from_counts(tp, fp, fn, tn)


def sigma_of(values) -> SigmaReport:
    """Population standard deviation (divisor m)."""
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptySelection("no transformed values")
    mean = math.fsum(x) / x.size
    dev = x - mean
    return SigmaReport(math.sqrt(math.fsum(dev * dev) / x.size), int(x.size))


def sigma(t: TransformedMap) -> SigmaReport:
    return sigma_of(t.selected())


def delta_theta(estimated: float, actual: float) -> float:
    """Absolute roll-angle error in degrees, modulo pi."""
    diff = math.fmod(abs(estimated - actual), math.pi)
    return math.degrees(min(diff, math.pi - diff))


@dataclass(frozen=True, eq=False)
class VDisparity:
    counts: np.ndarray  # rows x bins
    lo: float
    hi: float


def v_disparity(dmap: DisparityMap, mask: RoadMask | None = None, bins: int = 256) -> VDisparity:
    """Per-row histogram of valid road disparities over the global range."""
    if bins < 1:
        raise ValueError("bins must be >= 1")
    sel = selection(dmap, mask)
    if not sel.any():
        raise EmptySelection("no valid pixel inside the road mask")
    vals = dmap.values[sel]
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        hi = lo + 1.0
    col = np.clip(np.floor((vals - lo) * (bins / (hi - lo))).astype(np.int64), 0, bins - 1)
    row = np.nonzero(sel)[0]
    counts = np.zeros((dmap.height, bins), dtype=np.int64)
    np.add.at(counts, (row, col), 1)
    return VDisparity(counts, lo, hi)


# -- method comparison ------------------------------------------------------------

@dataclass(frozen=True)
class BenchRow:
    method: str
    theta_deg: float
    sigma: float
    elapsed: float        # median seconds, estimation + transform
    solve_elapsed: float  # median seconds spent locating theta
    evaluations: int


def _solve(method: str, w):
    if method == "closed-form":
        sol = solve_roll_angle(w)
        return sol.theta, 2
    if method == "gss":
        rep = gss_solve(w)
    elif method == "gd":
        rep = gd_solve(w)
    else:
        raise ValueError(f"unknown method {method!r}")
    return rep.theta, rep.evaluations


def run_method(dmap: DisparityMap, mask: RoadMask | None, method: str):
    """One timed pass; returns (TransformedMap, evaluations, total s, solve s)."""
    t0 = time.perf_counter()
    m = accumulate(dmap, mask)
    w = compute_w(m)
    t1 = time.perf_counter()
    theta, evals = _solve(method, w)
    t2 = time.perf_counter()
    model = fit_model(m, theta, method)
    tm = transform_map(dmap, mask, model)
    t3 = time.perf_counter()
    return tm, evals, t3 - t0, t2 - t1


def bench(dmap: DisparityMap, mask: RoadMask | None = None, repeats: int = 5,
          methods=METHODS) -> list[BenchRow]:
    """Median single-thread timings of each method on one map.

    Methods are interleaved within every repeat, and one warm-up pass per
    method is discarded.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    for meth in methods:
        run_method(dmap, mask, meth)
    totals = {m: [] for m in methods}
    solves = {m: [] for m in methods}
    last = {}
    for _ in range(repeats):
        for meth in methods:
            tm, evals, tot, sol = run_method(dmap, mask, meth)
            totals[meth].append(tot)
            solves[meth].append(sol)
            last[meth] = (tm, evals)
    rows = []
    for meth in methods:
        tm, evals = last[meth]
        rows.append(BenchRow(meth, tm.model.theta_deg, sigma(tm).sigma,
                             statistics.median(totals[meth]), statistics.median(solves[meth]), evals))
    return rows


# -- roll-angle sweep -------------------------------------------------------------

def sweep_delta_theta(kappas=KAPPA_GRID, seed: int = 0, **suite_kw):
    """Roll-angle error (degrees) for every suite angle and noise level.

    Returns ``(angles_deg, kappas, errors)`` with ``errors[i, j]`` the error
    at angle ``i`` and noise ``kappas[j]``.
    """
    kappas = tuple(kappas)
    angles = None
    errors = None
    for j, kappa in enumerate(kappas):
        specs = benchmark_suite(kappa=kappa, seed=seed + 1000 * j, **suite_kw)
        if errors is None:
            angles = np.array([math.degrees(s.theta) for s in specs])
            errors = np.zeros((len(specs), len(kappas)))
        for i, spec in enumerate(specs):
            dmap, mask, _ = generate(spec)
            model = estimate_from_moments(accumulate(dmap, mask))
            errors[i, j] = delta_theta(model.theta, spec.theta)
    return angles, np.array(kappas, dtype=float), errors


# -- tables -----------------------------------------------------------------------

def rows_to_dicts(rows) -> list[dict]:
    return [asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r) for r in rows]


def to_csv(rows) -> str:
    dicts = rows_to_dicts(rows)
    if not dicts:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(dicts[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(dicts)
    return buf.getvalue()


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6f}"
    return str(x)


def to_text(rows) -> str:
    """Aligned plain-text table."""
    dicts = rows_to_dicts(rows)
    if not dicts:
        return ""
    keys = list(dicts[0])
    cells = [keys] + [[_fmt(d[k]) for k in keys] for d in dicts]
    widths = [max(len(r[i]) for r in cells) for i in range(len(keys))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
