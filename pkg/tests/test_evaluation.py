import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from roadseg.core import DisparityMap, PixelCoord, RigConfig, RoadMask
from roadseg.errors import DimensionMismatch, EmptySelection
from roadseg.evaluation import (METHODS, BenchRow, bench, delta_theta, metrics_from_counts,
                                pixel_metrics, sigma, sigma_of, sweep_delta_theta, to_csv,
                                to_text, v_disparity)
from roadseg.solver import RoadModel, estimate
from roadseg.transform import transform_map

from conftest import as_map, plane

SMALL = RigConfig(700.0, 0.5, PixelCoord(39.5, 29.5), image_size=(80, 60))


def test_metrics_example():
    m = metrics_from_counts(9, 1, 1, 89)
    assert m.precision == pytest.approx(0.9)
    assert m.recall == pytest.approx(0.9)
    assert m.f_score == pytest.approx(0.9)
    assert m.iou == pytest.approx(9 / 11)
    assert m.accuracy == pytest.approx(0.98)


def test_metrics_undefined_ratios():
    m = metrics_from_counts(0, 0, 0, 10)
    assert (m.precision, m.recall, m.iou, m.accuracy) == (1.0, 1.0, 1.0, 1.0)
    m = metrics_from_counts(0, 0, 3, 7)
    assert m.precision == 1.0 and m.recall == 0.0 and m.f_score == 0.0


def test_pixel_metrics_region():
    pred = np.array([[1, 1, 0], [0, 0, 1]], bool)
    truth = np.array([[1, 0, 0], [0, 1, 1]], bool)
    m = pixel_metrics(pred, truth)
    assert (m.tp, m.fp, m.fn, m.tn) == (2, 1, 1, 2)
    region = np.array([[1, 1, 1], [0, 0, 0]], bool)
    m = pixel_metrics(pred, truth, region)
    assert (m.tp, m.fp, m.fn, m.tn) == (1, 1, 0, 1)
    with pytest.raises(DimensionMismatch):
        pixel_metrics(pred, truth[:, :2])


def test_sigma():
    assert sigma_of([0.0, 2.0]).sigma == 1.0
    assert sigma_of([5.0] * 7) == sigma_of([5.0] * 7)
    assert sigma_of([5.0] * 7).sigma == 0.0
    with pytest.raises(EmptySelection):
        sigma_of([])


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_delta_theta_symmetric_periodic(a, b):
    d = delta_theta(a, b)
    assert 0 <= d <= 90 + 1e-9
    assert d == pytest.approx(delta_theta(b, a), abs=1e-9)
    assert d == pytest.approx(delta_theta(a + math.pi, b), abs=1e-7)


def test_delta_theta_wraps():
    assert delta_theta(math.radians(89.9), math.radians(-89.9)) == pytest.approx(0.2)
    assert delta_theta(0.1, 0.1) == 0.0


def test_v_disparity_rows():
    vals = np.array([[1.0, 1.0, 3.0], [2.0, 2.0, 2.0]])
    vd = v_disparity(as_map(vals), bins=4)
    assert vd.counts.shape == (2, 4)
    assert vd.counts.sum() == 6
    assert vd.counts[0].tolist() == [2, 0, 0, 1]
    assert vd.counts[1].tolist() == [0, 0, 3, 0]
    with pytest.raises(EmptySelection):
        v_disparity(as_map(vals), RoadMask(np.zeros((2, 3), bool)))


def test_sigma_is_minimal_at_estimate():
    rng = np.random.default_rng(4)
    dm = as_map(plane(0.05, 40.0, 0.3, shape=(40, 60)) + rng.uniform(-1, 1, (40, 60)))
    best = estimate(dm)
    s0 = sigma(transform_map(dm, None, best)).sigma
    for dth in (-0.01, 0.003, 0.02):
        th = best.theta + dth
        t = -np.arange(60)[None, :] * math.sin(th) + np.arange(40)[:, None] * math.cos(th)
        a1, a0 = np.polyfit(t.ravel(), dm.values.ravel(), 1)
        other = RoadModel(th, a0, a1, 0.0, 0.0, dm.values.size, "probe")
        assert sigma(transform_map(dm, None, other)).sigma >= s0 - 1e-9


def test_bench_rows():
    rows = bench(as_map(plane(0.1, 40.0, 0.3, shape=(30, 40))), repeats=2)
    assert [r.method for r in rows] == list(METHODS)
    for r in rows:
        assert r.theta_deg == pytest.approx(math.degrees(0.1), abs=1e-3)
        assert r.elapsed >= r.solve_elapsed > 0
    with pytest.raises(ValueError):
        bench(as_map(plane(0.1, 40.0, 0.3)), repeats=0)


def test_sweep_shape():
    angles, kappas, errors = sweep_delta_theta((0, 20), rig=SMALL)
    assert angles.shape == (51,) and kappas.tolist() == [0.0, 20.0]
    assert errors.shape == (51, 2)
    assert errors[:, 0].max() < 1e-6
    assert errors[:, 1].max() > errors[:, 0].max()


def test_tables():
    rows = [BenchRow("gd", 1.5, 0.25, 0.001, 0.0005, 12)]
    csv_text = to_csv(rows)
    assert csv_text.splitlines()[0] == "method,theta_deg,sigma,elapsed,solve_elapsed,evaluations"
    assert csv_text.splitlines()[1].startswith("gd,1.5,0.25,")
    txt = to_text(rows).splitlines()
    assert len(txt) == 3 and "1.500000" in txt[2] and set(txt[1]) <= {"-", " "}
    assert to_csv([]) == "" and to_text([]) == ""
