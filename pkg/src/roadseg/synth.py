"""Synthetic rolled road planes with noise and injected potholes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import KITTI_RIG, DisparityMap, PixelCoord, RigConfig, RoadMask
from .errors import InvalidSpec

THETA_RANGE_DEG = 10.0
SUITE_SIZE = 51
KAPPA_GRID = tuple(range(0, 55, 5))
# road disparity at the principal point and its growth per rotated row
DEFAULT_A0 = 200.0
DEFAULT_A1 = 0.5


@dataclass(frozen=True)
class Pothole:
    center: PixelCoord
    semi_axes: tuple[float, float]  # along u, along v
    depth: float


@dataclass(frozen=True)
class SynthSpec:
    """Plane ``a0 + a1 * t`` with ``t`` measured from the principal point.

    ``taper`` is the fraction of each pothole's radius over which its
    depth falls smoothly (cos^2) to zero; 0 gives a flat-bottomed pit with
    a sharp rim, 1 a full cosine bowl.
    """

    rig: RigConfig = KITTI_RIG
    theta: float = 0.0
    a0: float = DEFAULT_A0
    a1: float = DEFAULT_A1
    kappa: float = 0.0
    seed: int = 0
    potholes: tuple[Pothole, ...] = field(default=())
    noise: str = "uniform"
    taper: float = 0.05

    def validate(self) -> None:
        if not -math.pi / 2 < self.theta <= math.pi / 2:
            raise InvalidSpec(f"theta {self.theta!r} outside (-pi/2, pi/2]")
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise InvalidSpec(f"kappa must be >= 0, got {self.kappa!r}")
        if self.noise not in ("uniform", "gaussian"):
            raise InvalidSpec(f"unknown noise model {self.noise!r}")
        if not 0.0 <= self.taper <= 1.0:
            raise InvalidSpec("taper must lie in [0, 1]")
        for p in self.potholes:
            if not p.depth > 0:
                raise InvalidSpec(f"pothole depth must be positive, got {p.depth!r}")
            if min(p.semi_axes) < 1:
                raise InvalidSpec(f"pothole semi-axes must be >= 1 pixel, got {p.semi_axes!r}")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Generating parameters; ``a0`` refers to the pixel-origin convention
    used by the estimator, i.e. ``f = a0 + a1 (-u sin(theta) + v cos(theta))``."""

    theta: float
    a0: float
    a1: float
    damage: np.ndarray
    depression: np.ndarray

    @property
    def model(self) -> tuple[float, float]:
        return (self.a0, self.a1)


def _noise(spec: SynthSpec, rng: np.random.Generator, shape) -> np.ndarray:
    if spec.kappa == 0:
        return np.zeros(shape)
    if spec.noise == "uniform":
        return spec.kappa * rng.uniform(-1.0, 1.0, size=shape)
    # normal with sigma = kappa / 3, resampled outside +-kappa
    out = rng.normal(0.0, spec.kappa / 3.0, size=shape)
    bad = np.abs(out) > spec.kappa
    while bad.any():
        out[bad] = rng.normal(0.0, spec.kappa / 3.0, size=int(bad.sum()))
        bad = np.abs(out) > spec.kappa
    return out


def depression_field(potholes, shape, taper: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel depth removed by the potholes and the union of their supports."""
    h, w = shape
    v, u = np.mgrid[0:h, 0:w].astype(np.float64)
    depth = np.zeros(shape)
    support = np.zeros(shape, dtype=bool)
    flat = 1.0 - taper
    for p in potholes:
        r = np.hypot((u - p.center.u) / p.semi_axes[0], (v - p.center.v) / p.semi_axes[1])
        inside = r < 1.0
        prof = np.full(shape, p.depth)
        if taper > 0:
            rim = inside & (r > flat)
            prof[rim] = p.depth * np.cos(0.5 * np.pi * (r[rim] - flat) / taper) ** 2
        depth = np.where(inside, np.maximum(depth, prof), depth)
        support |= inside
    return depth, support


def generate(spec: SynthSpec) -> tuple[DisparityMap, RoadMask, GroundTruth]:
    spec.validate()
    rig = spec.rig
    shape = (rig.height, rig.width)
    cu, cv = rig.principal_point.u, rig.principal_point.v
    c, s = math.cos(spec.theta), math.sin(spec.theta)
    u = np.arange(rig.width, dtype=np.float64)
    v = np.arange(rig.height, dtype=np.float64)
    t = -(u[None, :] - cu) * s + (v[:, None] - cv) * c
    rng = np.random.default_rng(spec.seed)
    depression, support = depression_field(spec.potholes, shape, spec.taper)
    d = spec.a0 + spec.a1 * t - depression + _noise(spec, rng, shape)
    d = np.maximum(d, 0.0)
    a0_origin = spec.a0 - spec.a1 * (-cu * s + cv * c)
    truth = GroundTruth(spec.theta, a0_origin, spec.a1, support, depression)
    return DisparityMap(d, np.ones(shape, dtype=bool)), RoadMask.full(*shape), truth


def benchmark_suite(kappa: float = 0.0, seed: int = 0, rig: RigConfig = KITTI_RIG,
                    a0: float = DEFAULT_A0, a1: float = DEFAULT_A1, noise: str = "uniform") -> list[SynthSpec]:
    """51 roll angles evenly spaced over [-10, +10] degrees (0.4 degree steps)."""
    angles = np.linspace(-THETA_RANGE_DEG, THETA_RANGE_DEG, SUITE_SIZE)
    return [SynthSpec(rig=rig, theta=math.radians(a), a0=a0, a1=a1, kappa=kappa,
                      seed=seed + i, noise=noise)
            for i, a in enumerate(angles)]


def random_pothole_spec(seed: int, kappa: float = 1.0, rig: RigConfig = KITTI_RIG,
                        depth=(4.0, 6.0), semi_u=(90.0, 170.0), semi_v=(45.0, 80.0),
                        area_fraction=(0.05, 0.15)) -> SynthSpec:
    """A rolled plane with 1-3 non-overlapping elliptical potholes.

    Layouts are redrawn until the ellipses cover ``area_fraction`` of the
    image; Otsu cannot isolate damage that is only a sliver of the road.
    """
    rng = np.random.default_rng(seed)
    theta = math.radians(rng.uniform(-THETA_RANGE_DEG, THETA_RANGE_DEG))
    total = rig.width * rig.height
    while True:
        holes: list[Pothole] = []
        want = int(rng.integers(1, 4))
        for _ in range(1000):
            if len(holes) == want:
                break
            au, av = rng.uniform(*semi_u), rng.uniform(*semi_v)
            cu = rng.uniform(au + 2, rig.width - au - 2)
            cv = rng.uniform(av + 2, rig.height - av - 2)
            if all(abs(cu - h.center.u) > au + h.semi_axes[0] + 2
                   or abs(cv - h.center.v) > av + h.semi_axes[1] + 2 for h in holes):
                holes.append(Pothole(PixelCoord(cu, cv), (au, av), rng.uniform(*depth)))
        frac = sum(math.pi * h.semi_axes[0] * h.semi_axes[1] for h in holes) / total
        if area_fraction[0] <= frac <= area_fraction[1]:
            break
    return SynthSpec(rig=rig, theta=theta, kappa=kappa, seed=seed, potholes=tuple(holes))


# -- plain-text key = value serialisation ---------------------------------------

def to_config(spec: SynthSpec) -> str:
    rig = spec.rig
    lines = [
        f"width = {rig.width}",
        f"height = {rig.height}",
        f"focal_length = {rig.focal_length!r}",
        f"baseline = {rig.baseline!r}",
        f"principal_u = {rig.principal_point.u!r}",
        f"principal_v = {rig.principal_point.v!r}",
        f"theta_deg = {math.degrees(spec.theta)!r}",
        f"a0 = {spec.a0!r}",
        f"a1 = {spec.a1!r}",
        f"kappa = {spec.kappa!r}",
        f"seed = {spec.seed}",
        f"noise = {spec.noise}",
        f"taper = {spec.taper!r}",
    ]
    for p in spec.potholes:
        lines.append(f"pothole = {p.center.u!r}, {p.center.v!r}, {p.semi_axes[0]!r}, "
                     f"{p.semi_axes[1]!r}, {p.depth!r}")
    return "\n".join(lines) + "\n"


def from_config(text: str) -> SynthSpec:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``pothole`` may repeat."""
    kv: dict[str, str] = {}
    holes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidSpec(f"line {lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        if key == "pothole":
            try:
                cu, cv, au, av, depth = (float(x) for x in value.split(","))
            except ValueError:
                raise InvalidSpec(f"line {lineno}: pothole needs 'cu, cv, au, av, depth'") from None
            holes.append(Pothole(PixelCoord(cu, cv), (au, av), depth))
        else:
            kv[key] = value
    known = {"width", "height", "focal_length", "baseline", "principal_u", "principal_v",
             "theta_deg", "a0", "a1", "kappa", "seed", "noise", "taper"}
    unknown = set(kv) - known
    if unknown:
        raise InvalidSpec(f"unknown keys: {', '.join(sorted(unknown))}")
    base = SynthSpec()
    try:
        w = int(kv.get("width", KITTI_RIG.width))
        h = int(kv.get("height", KITTI_RIG.height))
        if (w, h) == (KITTI_RIG.width, KITTI_RIG.height):
            default_pp = KITTI_RIG.principal_point
        else:
            default_pp = PixelCoord((w - 1) / 2, (h - 1) / 2)
        rig = RigConfig(
            focal_length=float(kv.get("focal_length", KITTI_RIG.focal_length)),
            baseline=float(kv.get("baseline", KITTI_RIG.baseline)),
            principal_point=PixelCoord(float(kv.get("principal_u", default_pp.u)),
                                       float(kv.get("principal_v", default_pp.v))),
            image_size=(w, h),
        )
        spec = replace(
            base, rig=rig,
            theta=math.radians(float(kv.get("theta_deg", 0.0))),
            a0=float(kv.get("a0", base.a0)), a1=float(kv.get("a1", base.a1)),
            kappa=float(kv.get("kappa", base.kappa)), seed=int(kv.get("seed", base.seed)),
            noise=kv.get("noise", base.noise), taper=float(kv.get("taper", base.taper)),
            potholes=tuple(holes),
        )
    except ValueError as exc:
        raise InvalidSpec(str(exc)) from None
    spec.validate()
    return spec


def load_config(path) -> SynthSpec:
    return from_config(Path(path).read_text())
