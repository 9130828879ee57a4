"""Grid types, pixel coordinates and rig configuration.

Coordinates follow image convention: ``u`` is the zero-based column index
and ``v`` the zero-based row index.  Arrays are indexed ``[v, u]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PixelCoord:
    u: float
    v: float


@dataclass(frozen=True, eq=False)
class DisparityMap:
    """Real-valued disparity grid with a per-pixel validity flag.

    Invalid pixels always carry the value 0.
    """

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DimensionMismatch(f"disparity grid must be 2-D and non-empty, got shape {values.shape}")
        if valid.shape != values.shape:
            raise DimensionMismatch(f"validity shape {valid.shape} != value shape {values.shape}")
        valid = valid & np.isfinite(values) & (values >= 0)
        values = np.where(valid, values, 0.0)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "valid", _frozen(valid))

    @classmethod
    def from_array(cls, values, valid=None) -> "DisparityMap":
        """Build a map; NaN or negative entries become invalid."""
        values = np.asarray(values, dtype=np.float64)
        if valid is None:
            valid = np.isfinite(values) & (values >= 0)
        return cls(values, valid)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, DisparityMap):
            return NotImplemented
        return (np.array_equal(self.valid, other.valid)
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True, eq=False)
class RoadMask:
    member: np.ndarray

    def __post_init__(self):
        member = np.asarray(self.member, dtype=bool)
        if member.ndim != 2:
            raise DimensionMismatch(f"road mask must be 2-D, got shape {member.shape}")
        object.__setattr__(self, "member", _frozen(member))

    @classmethod
    def full(cls, height: int, width: int) -> "RoadMask":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def height(self) -> int:
        return self.member.shape[0]

    @property
    def width(self) -> int:
        return self.member.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.member.shape

    def count(self) -> int:
        return int(self.member.sum())

    def __eq__(self, other):
        if not isinstance(other, RoadMask):
            return NotImplemented
        return np.array_equal(self.member, other.member)


@dataclass(frozen=True)
class RigConfig:
    focal_length: float
    baseline: float
    principal_point: PixelCoord
    image_size: tuple[int, int]  # (width, height)

    def __post_init__(self):
        if not self.focal_length > 0:
            raise ValueError("focal_length must be positive")
        if not self.baseline > 0:
            raise ValueError("baseline must be positive")
        w, h = self.image_size
        if w < 1 or h < 1:
            raise ValueError("image_size must be at least 1x1")

    @property
    def width(self) -> int:
        return int(self.image_size[0])

    @property
    def height(self) -> int:
        return int(self.image_size[1])


# Rectified KITTI colour camera pair (P_rect_02 / P_rect_03 of the 2011_09_26 calibration).
KITTI_RIG = RigConfig(
    focal_length=721.5377,
    baseline=0.5327,
    principal_point=PixelCoord(609.5593, 172.854),
    image_size=(1242, 375),
)


def selection(dmap: DisparityMap, mask: RoadMask | None) -> np.ndarray:
    """Boolean grid of pixels that are valid and inside the road mask."""
    if mask is None:
        return dmap.valid
    if mask.shape != dmap.shape:
        raise DimensionMismatch(f"mask shape {mask.shape} != map shape {dmap.shape}")
    return dmap.valid & mask.member


def rotate_point(u, v, theta):
    """Rotate ``(u, v)`` about the origin, returning ``(s, t)``.

    ``s = u cos(theta) + v sin(theta)``, ``t = -u sin(theta) + v cos(theta)``.
    Works on scalars and numpy arrays alike.
    """
    c, s = math.cos(theta), math.sin(theta)
    return u * c + v * s, -u * s + v * c


def normalize_angle(theta: float) -> float:
    """Shift ``theta`` by multiples of pi into (-pi/2, pi/2]."""
    half = math.pi / 2
    theta = math.fmod(theta, math.pi)
    if theta > half:
        theta -= math.pi
    elif theta <= -half:
        theta += math.pi
    return theta
