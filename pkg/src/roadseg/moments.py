"""Masked sums consumed by every closed-form road-model formula."""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .core import DisparityMap, RoadMask, selection
from .errors import EmptySelection


@dataclass(frozen=True)
class Moments:
    """Count plus first and second order sums of ``(u, v, d)`` over a pixel set."""

    n: float = 0.0
    su: float = 0.0
    sv: float = 0.0
    sd: float = 0.0
    suu: float = 0.0
    svv: float = 0.0
    suv: float = 0.0
    sdu: float = 0.0
    sdv: float = 0.0
    sdd: float = 0.0

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    def swapped(self) -> "Moments":
        """Moments of the same pixels with the roles of u and v exchanged."""
        return Moments(self.n, self.sv, self.su, self.sd, self.svv, self.suu,
                       self.suv, self.sdv, self.sdu, self.sdd)


ZERO = Moments()


def merge(a: Moments, b: Moments) -> Moments:
    return Moments(*(x + y for x, y in zip(a.as_tuple(), b.as_tuple())))


def accumulate_points(u, v, d) -> Moments:
    """Moments of explicit pixel lists.

    Every sum is exactly rounded (``math.fsum``), so the result does not
    depend on the order in which the points are listed.
    """
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    d = np.asarray(d, dtype=np.float64).ravel()
    if not (u.shape == v.shape == d.shape):
        raise ValueError("u, v and d must have the same length")
    if u.size == 0:
        raise EmptySelection("no pixels to accumulate")
    fs = math.fsum
    return Moments(
        n=float(u.size),
        su=fs(u), sv=fs(v), sd=fs(d),
        suu=fs(u * u), svv=fs(v * v), suv=fs(u * v),
        sdu=fs(d * u), sdv=fs(d * v), sdd=fs(d * d),
    )


def accumulate(dmap: DisparityMap, mask: RoadMask | None = None,
               origin: tuple[float, float] = (0.0, 0.0)) -> Moments:
    """Accumulate moments over valid road pixels of ``dmap``.

    Works row-wise: per-row partial sums come from numpy's pairwise
    reductions and are then combined with ``math.fsum``.  Coordinate sums
    are integer valued and therefore exact in double precision.

    ``origin`` shifts the pixel coordinates, i.e. pixel ``[v, u]`` is
    accumulated at ``(u - origin[0], v - origin[1])``.
    """
    sel = selection(dmap, mask)
    h, w = sel.shape
    u = np.arange(w, dtype=np.float64) - origin[0]
    v = np.arange(h, dtype=np.float64) - origin[1]

    row_n = sel.sum(axis=1, dtype=np.float64)
    n = float(row_n.sum())
    if n == 0:
        raise EmptySelection("no valid pixel inside the road mask")

    selw = sel.astype(np.float64)
    dm = dmap.values if sel is dmap.valid else np.where(sel, dmap.values, 0.0)

    row_su = selw @ u
    row_suu = selw @ (u * u)
    row_sd = dm.sum(axis=1)
    row_sdu = dm @ u
    row_sdd = np.einsum("ij,ij->i", dm, dm)

    fs = math.fsum
    return Moments(
        n=n,
        su=fs(row_su),
        sv=fs(row_n * v),
        sd=fs(row_sd),
        suu=fs(row_suu),
        svv=fs(row_n * v * v),
        suv=fs(row_su * v),
        sdu=fs(row_sdu),
        sdv=fs(row_sd * v),
        sdd=fs(row_sdd),
    )
