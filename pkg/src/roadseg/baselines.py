"""Iterative reference optimisers for the roll-angle objective.

Both work on the same ``WCoefficients`` as the closed form, so they differ
from it only in how the maximiser of ``g`` is located.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .core import normalize_angle
from .errors import NonConvergence
from .solver import WCoefficients, dg_dtheta, g_of_theta, golden_max

DEFAULT_BRACKET = (math.radians(-20.0), math.radians(20.0))
DEFAULT_TOL = 1e-6
DEFAULT_STEP = 1e-9


@dataclass(frozen=True)
class IterativeSolveReport:
    theta: float
    g_value: float
    iterations: int
    evaluations: int
    elapsed: float
    trace: tuple[float, ...] = field(default=(), repr=False)


def gss_solve(w: WCoefficients, bracket=DEFAULT_BRACKET, tol: float = DEFAULT_TOL) -> IterativeSolveReport:
    """Golden-section maximisation of ``g`` over ``bracket``."""
    lo, hi = bracket
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not (-math.pi / 2 <= lo < hi <= math.pi / 2):
        raise ValueError(f"bracket {bracket!r} must lie inside (-pi/2, pi/2]")
    t0 = time.perf_counter()
    theta, g, it, evals = golden_max(lambda t: g_of_theta(w, t), lo, hi, tol)
    elapsed = time.perf_counter() - t0
    return IterativeSolveReport(normalize_angle(theta), g, max(it, 1), evals, elapsed)


def gd_solve(w: WCoefficients, theta0: float = 0.0, step: float = DEFAULT_STEP,
             tol: float = DEFAULT_TOL, max_iter: int = 200) -> IterativeSolveReport:
    """Gradient ascent on ``g`` with the analytic derivative.

    The first step is ``step * w0 / |w3|`` times the gradient; afterwards
    the step follows the Barzilai-Borwein secant rule.  A step that lowers
    ``g`` is halved until it does not.  Iteration stops once the next
    secant move is shorter than ``tol``.  ``evaluations`` counts both
    ``g`` and derivative evaluations.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    t0 = time.perf_counter()
    rate = step * w.w0 / abs(w.w3) if w.w3 else step
    theta = theta0
    g = g_of_theta(w, theta)
    grad = dg_dtheta(w, theta)
    grad0 = abs(grad)
    evals = 2
    trace = [g]
    it = 0
    while it < max_iter:
        it += 1
        if abs(grad) <= 1e-12 * abs(g):  # stationary to rounding
            break
        cand = theta + rate * grad
        gc = g_of_theta(w, cand)
        evals += 1
        halvings = 0
        while gc < g and halvings < 60:
            rate *= 0.5
            cand = theta + rate * grad
            gc = g_of_theta(w, cand)
            evals += 1
            halvings += 1
        if gc < g:
            break
        gradc = dg_dtheta(w, cand)
        evals += 1
        ds, dy = cand - theta, gradc - grad
        secant = ds * dy < 0
        if secant:
            rate = -ds / dy
        else:
            rate *= 2.0
        theta, g, grad = cand, gc, gradc
        trace.append(g)
        # a doubled rate says nothing about curvature, so only trust secant steps
        if grad == 0.0 or (secant and abs(rate * grad) < tol):
            break
    else:
        if abs(grad) > 1e-6 * grad0:
            raise NonConvergence(f"gradient ascent did not converge in {max_iter} iterations")
    elapsed = time.perf_counter() - t0
    theta_n = normalize_angle(theta)
    return IterativeSolveReport(theta_n, g, it, evals, elapsed, tuple(trace))
