"""Road-plane flattening of a disparity map."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DisparityMap, PixelCoord, RoadMask, selection
from .errors import RangeError
from .solver import RoadModel


@dataclass(frozen=True)
class TransformedMap:
    map: DisparityMap
    delta: float
    model: RoadModel

    @property
    def values(self) -> np.ndarray:
        return self.map.values

    @property
    def valid(self) -> np.ndarray:
        return self.map.valid

    def selected(self) -> np.ndarray:
        """Transformed values of all valid pixels, row-major."""
        return self.map.values[self.map.valid]


def road_disparity(model: RoadModel, p: PixelCoord) -> float:
    return float(model(p.u, p.v))


def model_field(model: RoadModel, shape: tuple[int, int]) -> np.ndarray:
    """Road disparity predicted by ``model`` at every pixel of a grid."""
    h, w = shape
    u = np.arange(w, dtype=np.float64)
    v = np.arange(h, dtype=np.float64)
    return model(u[None, :], v[:, None])


def residual_field(dmap: DisparityMap, model: RoadModel) -> np.ndarray:
    """``D - f`` on every valid pixel (road or not); NaN elsewhere."""
    res = dmap.values - model_field(model, dmap.shape)
    return np.where(dmap.valid, res, np.nan)


def parse_delta(policy) -> float | None:
    """``"auto"`` -> None; ``"fixed:X"`` or a number -> float(X)."""
    if policy is None or policy == "auto":
        return None
    if isinstance(policy, str):
        if not policy.startswith("fixed:"):
            raise ValueError(f"delta policy must be 'auto' or 'fixed:X', got {policy!r}")
        policy = policy[len("fixed:"):]
    return float(policy)


def transform_map(dmap: DisparityMap, mask: RoadMask | None, model: RoadModel,
                  delta="auto") -> TransformedMap:
    """Subtract the road model from valid road pixels and add an offset.

    With ``delta="auto"`` the offset is the smallest non-negative constant
    that keeps every transformed value non-negative, so the minimum is 0
    unless all residuals are already positive.  Off-road pixels are left
    invalid.
    """
    sel = selection(dmap, mask)
    res = dmap.values - model_field(model, dmap.shape)
    fixed = parse_delta(delta)
    lowest = float(res[sel].min()) if sel.any() else 0.0
    if fixed is None:
        d = max(-lowest, 0.0)
    else:
        d = fixed
        if lowest + d < 0:
            raise RangeError(f"fixed delta {d:g} leaves transformed values negative (min residual {lowest:g})")
    out = np.where(sel, res + d, 0.0)
    if fixed is None:
        # res + (-res) may round to -0 or a tiny negative
        out = np.maximum(out, 0.0)
    return TransformedMap(DisparityMap(out, sel), d, model)
