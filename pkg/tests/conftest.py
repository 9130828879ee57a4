import math

import numpy as np
import pytest

from roadseg.core import DisparityMap, RoadMask


def plane(theta, a0, a1, shape=(60, 80), origin=(0.0, 0.0)):
    """Exact disparity plane a0 + a1 * t(theta) with t measured from ``origin``."""
    h, w = shape
    v, u = np.mgrid[0:h, 0:w].astype(float)
    t = -(u - origin[0]) * math.sin(theta) + (v - origin[1]) * math.cos(theta)
    return a0 + a1 * t


def as_map(values, valid=None):
    values = np.asarray(values, dtype=float)
    if valid is None:
        valid = np.ones(values.shape, dtype=bool)
    return DisparityMap(values, valid)


def full_mask(shape):
    return RoadMask.full(*shape)


def lstsq_energy_terms(u, v, d, theta):
    """Brute-force least squares at a fixed roll angle: (a0, a1, E, g)."""
    t = -u * math.sin(theta) + v * math.cos(theta)
    T = np.column_stack([np.ones_like(t), t])
    a, *_ = np.linalg.lstsq(T, d, rcond=None)
    r = d - T @ a
    return a[0], a[1], float(r @ r), float(d @ T @ a)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Call ``criterion(name, ok, detail)`` to log a pass/fail line and assert."""
    def record(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        _CRITERIA.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
