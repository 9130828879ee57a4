"""Closed-form roll-angle and road-model estimation.

For a roll angle ``theta`` the road disparity is modelled as
``f = a0 + a1 * t`` with ``t = -u sin(theta) + v cos(theta)``.  The best
least-squares fit leaves the energy ``E_min(theta) = sum(d^2) - g(theta)``
where ``g`` is a ratio of first-order trigonometric polynomials in
``2 theta``::

    g(theta) = (w3 + w4 cos 2theta + w5 sin 2theta)
             / (w0 + w1 cos 2theta + w2 sin 2theta)

Maximising ``g`` therefore reduces to a quadratic in ``tan(theta)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import DisparityMap, RoadMask, normalize_angle
from .errors import (DegenerateObjective, InsufficientPixels,
                     SingularDenominator, SingularNormalMatrix)
from .moments import Moments, accumulate

log = logging.getLogger(__name__)

SINGULAR_RTOL = 1e-12
GRID_SAMPLES = 18000
HALF_PI = math.pi / 2


@dataclass(frozen=True)
class WCoefficients:
    w0: float
    w1: float
    w2: float
    w3: float
    w4: float
    w5: float

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.w0, self.w1, self.w2, self.w3, self.w4, self.w5)

    def stationarity_terms(self) -> tuple[float, float, float]:
        """``(C, A, B)`` such that dg/dtheta is proportional to
        ``-(C + A cos 2theta + B sin 2theta)``."""
        w0, w1, w2, w3, w4, w5 = self.as_tuple()
        return (w4 * w2 - w5 * w1, w3 * w2 - w5 * w0, w4 * w0 - w3 * w1)


@dataclass(frozen=True)
class RoadModel:
    theta: float
    a0: float
    a1: float
    e_min: float
    g_value: float
    n_pixels: int
    method: str = "closed-form"

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)

    def __call__(self, u, v):
        """Road disparity ``a0 + a1 (-u sin(theta) + v cos(theta))``."""
        return self.a0 + self.a1 * (-u * math.sin(self.theta) + v * math.cos(self.theta))


class RollSolution(NamedTuple):
    theta: float
    g_value: float
    method: str = "closed-form"


def compute_w(m: Moments) -> WCoefficients:
    if m.n < 3:
        raise InsufficientPixels(f"need at least 3 pixels, got {m.n:g}")
    n = m.n
    su, sv, sd = m.su, m.sv, m.sd
    suu, svv, suv = m.suu, m.svv, m.suv
    sdu, sdv = m.sdu, m.sdv

    w0 = 0.5 * (n * (svv + suu) - sv * sv - su * su)
    w1 = 0.5 * (n * (svv - suu) - sv * sv + su * su)
    w2 = sv * su - n * suv
    w3 = (0.5 * (sd * sd * (svv + suu) + n * (sdv * sdv + sdu * sdu))
          - sd * (sv * sdv + su * sdu))
    w4 = (0.5 * (sd * sd * (svv - suu) + n * (sdv * sdv - sdu * sdu))
          - sd * (sv * sdv - su * sdu))
    w5 = sd * (sv * sdu + su * sdv) - sd * sd * suv - n * sdv * sdu
    return WCoefficients(w0, w1, w2, w3, w4, w5)


def _ratio(w: WCoefficients, theta):
    w0, w1, w2, w3, w4, w5 = w.as_tuple()
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return w3 + w4 * c + w5 * s, w0 + w1 * c + w2 * s


def g_of_theta(w: WCoefficients, theta: float) -> float:
    num, den = _ratio(w, theta)
    if abs(den) < SINGULAR_RTOL * abs(w.w0):
        raise SingularDenominator(f"g undefined at theta={theta!r}")
    return float(num / den)


def g_grid(w: WCoefficients, thetas: np.ndarray) -> np.ndarray:
    """Vectorised ``g``; NaN where the denominator is singular."""
    num, den = _ratio(w, np.asarray(thetas, dtype=np.float64))
    bad = np.abs(den) < SINGULAR_RTOL * abs(w.w0)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = num / den
    return np.where(bad, np.nan, g)


def dg_dtheta(w: WCoefficients, theta: float) -> float:
    c_, a_, b_ = w.stationarity_terms()
    _, den = _ratio(w, theta)
    if abs(den) < SINGULAR_RTOL * abs(w.w0):
        raise SingularDenominator(f"g undefined at theta={theta!r}")
    return float(-2.0 * (c_ + a_ * math.cos(2 * theta) + b_ * math.sin(2 * theta)) / den**2)


def _pick_best(w: WCoefficients, candidates, method: str) -> RollSolution:
    best = None
    for theta in candidates:
        theta = normalize_angle(theta)
        try:
            g = g_of_theta(w, theta)
        except SingularDenominator:
            continue
        if best is None or g > best[1]:
            best = (theta, g)
        elif math.isclose(g, best[1], rel_tol=1e-15, abs_tol=0.0) and abs(theta) < abs(best[0]):
            best = (theta, g)
    if best is None:
        raise DegenerateObjective("g is undefined at every stationary point")
    return RollSolution(best[0], best[1], method)


def solve_roll_angle(w: WCoefficients) -> RollSolution:
    """Roll angle in (-pi/2, pi/2] maximising ``g``, from the analytic roots.

    Setting dg/dtheta = 0 and substituting ``tau = tan(theta)`` gives
    ``(C - A) tau^2 + 2 B tau + (C + A) = 0`` whose roots are
    ``(B +/- sqrt(delta)) / (A - C)``, ``delta = A^2 + B^2 - C^2``.
    The roots are evaluated in the cancellation-free form
    ``q / (A - C)`` and ``-(C + A) / q`` with ``q = B + sign(B) sqrt(delta)``.
    """
    w0 = w.w0
    if not all(math.isfinite(x) for x in w.as_tuple()):
        raise DegenerateObjective("non-finite coefficients")
    if not w0 > 0:
        raise DegenerateObjective("w0 must be positive (pixels are collinear or coincident)")
    c_, a_, b_ = w.stationarity_terms()
    scale = max(abs(a_), abs(b_), abs(c_))
    if scale == 0.0:
        raise DegenerateObjective("g is constant")
    delta = a_ * a_ + b_ * b_ - c_ * c_
    if delta < 0:
        raise DegenerateObjective(f"negative discriminant {delta:g}")
    lead = a_ - c_
    if abs(lead) <= SINGULAR_RTOL * scale:
        # one root sits at tan(theta) = infinity; the other solves 2 B tau + (C + A) = 0
        if abs(b_) <= SINGULAR_RTOL * scale:
            raise DegenerateObjective("vanishing arctan denominator and linear term")
        return _pick_best(w, (math.atan(-(c_ + a_) / (2 * b_)), HALF_PI), "closed-form")
    root = math.sqrt(delta)
    q = b_ + math.copysign(root, b_)
    if q == 0.0:
        return _pick_best(w, (math.atan(b_ / lead),), "closed-form")
    return _pick_best(w, (math.atan(q / lead), math.atan(-(c_ + a_) / q)), "closed-form")


def golden_max(f: Callable[[float], float], lo: float, hi: float, tol: float,
               max_iter: int = 500) -> tuple[float, float, int, int]:
    """Golden-section maximisation of ``f`` on ``[lo, hi]``.

    Returns ``(x, f(x), iterations, evaluations)``; stops once the bracket
    is narrower than ``tol``.  NaN values count as minus infinity.
    """
    invphi = (math.sqrt(5) - 1) / 2

    def val(x):
        y = f(x)
        return -math.inf if y != y else y

    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = val(x1), val(x2)
    evals = 2
    it = 0
    while (b - a) >= tol and it < max_iter:
        it += 1
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = val(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = val(x2)
        evals += 1
    x = 0.5 * (a + b)
    fx = val(x)
    evals += 1
    # the midpoint of a bracket is not guaranteed to beat the interior probes
    for xc, fc in ((x1, f1), (x2, f2)):
        if fc > fx:
            x, fx = xc, fc
    return x, fx, it, evals


def fallback_grid_solve(w: WCoefficients, samples: int = GRID_SAMPLES) -> RollSolution:
    """Grid argmax of ``g`` on (-pi/2, pi/2] plus three golden-section rounds."""
    step = math.pi / samples
    thetas = -HALF_PI + step * np.arange(1, samples + 1)
    g = g_grid(w, thetas)
    if np.isnan(g).sum() > samples // 2:
        raise SingularDenominator("g undefined on more than half of the grid")
    k = int(np.nanargmax(g))
    theta = float(thetas[k])

    def f(t):
        try:
            return g_of_theta(w, t)
        except SingularDenominator:
            return math.nan

    best_g = float(g[k])
    half = step
    for _ in range(3):
        t, gt, _, _ = golden_max(f, theta - half, theta + half, tol=half * 1e-3)
        if gt >= best_g:
            theta, best_g = t, gt
        half *= 2e-3
    theta = normalize_angle(theta)
    return RollSolution(theta, g_of_theta(w, theta), "fallback-grid")


def fit_model(m: Moments, theta: float, method: str = "closed-form") -> RoadModel:
    """Least-squares ``(a0, a1)`` at a fixed roll angle via the 2x2 normal matrix."""
    if m.n < 3:
        raise InsufficientPixels(f"need at least 3 pixels, got {m.n:g}")
    theta = normalize_angle(theta)
    c, s = math.cos(theta), math.sin(theta)
    c2, s2 = math.cos(2 * theta), math.sin(2 * theta)
    n = m.n
    r0 = m.sv * c - m.su * s
    r1 = 0.5 * (m.svv + m.suu) + 0.5 * (m.svv - m.suu) * c2 - m.suv * s2
    det = n * r1 - r0 * r0
    if det <= SINGULAR_RTOL * n * r1:
        raise SingularNormalMatrix("rotated row coordinates are all equal")
    sdt = m.sdv * c - m.sdu * s
    a0 = (r1 * m.sd - r0 * sdt) / det
    a1 = (n * sdt - r0 * m.sd) / det
    g = a0 * m.sd + a1 * sdt
    e_min = max(m.sdd - g, 0.0)
    return RoadModel(theta, a0, a1, e_min, g, int(n), method)


def estimate_from_moments(m: Moments) -> RoadModel:
    w = compute_w(m)
    try:
        sol = solve_roll_angle(w)
    except DegenerateObjective as exc:
        log.info("closed form unavailable (%s); using grid search", exc)
        sol = fallback_grid_solve(w)
    return fit_model(m, sol.theta, sol.method)


def estimate(dmap: DisparityMap, mask: RoadMask | None = None) -> RoadModel:
    """Estimate roll angle and road model from the valid road pixels of ``dmap``."""
    return estimate_from_moments(accumulate(dmap, mask))
