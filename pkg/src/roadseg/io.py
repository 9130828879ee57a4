"""Disparity map, mask and segmentation file formats.

``uint16-png-div256``  16-bit grey PNG, disparity = stored / 256, 0 = invalid (KITTI)
``pgm16-div256``       binary PGM (P5, maxval 65535, big-endian), same encoding
``csv-real``           comma-separated reals, one image row per line; NaN or < 0 = invalid
``binary-f64-grid``    b"DSPF", u64 width, u64 height, row-major f64 (all little-endian); NaN = invalid
"""
from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .core import DisparityMap, RoadMask
from .errors import EmptyMap, FormatError, ParseError, RangeError

FORMATS = ("uint16-png-div256", "pgm16-div256", "csv-real", "binary-f64-grid")
MAGIC = b"DSPF"
_SUFFIX = {".png": "uint16-png-div256", ".pgm": "pgm16-div256", ".csv": "csv-real",
           ".dspf": "binary-f64-grid", ".bin": "binary-f64-grid"}

PURPLE = (128, 0, 128)
RED = (255, 0, 0)


def guess_format(path) -> str:
    try:
        return _SUFFIX[Path(path).suffix.lower()]
    except KeyError:
        raise FormatError(f"cannot infer a disparity format from {path!s}") from None


# -- PGM --------------------------------------------------------------------------

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def _read_pgm(path) -> tuple[np.ndarray, int]:
    data = Path(path).read_bytes()
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if not m:
            raise ParseError(f"{path}: truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise ParseError(f"{path}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise ParseError(f"{path}: malformed PGM header") from None
    if not 0 < maxval < 65536:
        raise ParseError(f"{path}: bad maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * dtype.itemsize
    if len(data) - pos < need:
        raise ParseError(f"{path}: expected {need} bytes of pixel data, found {len(data) - pos}")
    arr = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    return arr.reshape(height, width).astype(np.int64), maxval


def _write_pgm(path, arr: np.ndarray, maxval: int) -> None:
    h, w = arr.shape
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{w} {h}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + np.ascontiguousarray(arr, dtype=dtype).tobytes())


# -- disparity maps ---------------------------------------------------------------

def _decode_div256(stored: np.ndarray) -> DisparityMap:
    if stored.size == 0:
        raise EmptyMap("map has no pixels")
    valid = stored != 0
    return DisparityMap(np.where(valid, stored / 256.0, 0.0), valid)


def _encode_div256(dmap: DisparityMap) -> np.ndarray:
    code = np.rint(dmap.values * 256.0)
    bad = dmap.valid & ((code < 1) | (code > 65535))
    if bad.any():
        v, u = np.argwhere(bad)[0]
        raise RangeError(f"disparity {dmap.values[v, u]!r} at (u={u}, v={v}) cannot be stored as uint16/256")
    return np.where(dmap.valid, code, 0).astype(np.uint16)


def read_disparity(path, fmt: str | None = None) -> DisparityMap:
    fmt = fmt or guess_format(path)
    if fmt == "uint16-png-div256":
        try:
            img = Image.open(path)
        except (OSError, ValueError) as exc:
            raise ParseError(f"{path}: {exc}") from None
        if img.mode not in ("I;16", "I;16B", "I;16L", "I"):
            raise FormatError(f"{path}: expected a 16-bit greyscale PNG, got mode {img.mode}")
        stored = np.asarray(img).astype(np.int64)
        return _decode_div256(stored)
    if fmt == "pgm16-div256":
        stored, maxval = _read_pgm(path)
        if maxval <= 255:
            raise FormatError(f"{path}: 8-bit PGM where a 16-bit disparity map was expected")
        return _decode_div256(stored)
    if fmt == "csv-real":
        rows = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            if not line.strip():
                continue
            try:
                rows.append([float(x) for x in line.split(",")])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: not a number") from None
        if not rows:
            raise EmptyMap(f"{path}: no data")
        if len({len(r) for r in rows}) != 1:
            raise ParseError(f"{path}: ragged rows")
        return DisparityMap.from_array(np.array(rows))
    if fmt == "binary-f64-grid":
        data = Path(path).read_bytes()
        if data[:4] != MAGIC or len(data) < 20:
            raise ParseError(f"{path}: missing DSPF header")
        width, height = struct.unpack_from("<QQ", data, 4)
        if width == 0 or height == 0:
            raise EmptyMap(f"{path}: zero-sized grid")
        if len(data) != 20 + 8 * width * height:
            raise ParseError(f"{path}: payload size does not match {width}x{height}")
        arr = np.frombuffer(data, dtype="<f8", offset=20).reshape(height, width)
        return DisparityMap.from_array(arr)
    raise FormatError(f"unknown disparity format {fmt!r}")


def write_disparity(dmap: DisparityMap, path, fmt: str | None = None) -> None:
    fmt = fmt or guess_format(path)
    if fmt == "uint16-png-div256":
        Image.fromarray(_encode_div256(dmap)).save(path, format="PNG")
    elif fmt == "pgm16-div256":
        _write_pgm(path, _encode_div256(dmap), 65535)
    elif fmt == "csv-real":
        vals = np.where(dmap.valid, dmap.values, np.nan)
        lines = (",".join(repr(float(x)) for x in row) for row in vals)
        Path(path).write_text("\n".join(lines) + "\n")
    elif fmt == "binary-f64-grid":
        vals = np.where(dmap.valid, dmap.values, np.nan).astype("<f8")
        Path(path).write_bytes(MAGIC + struct.pack("<QQ", dmap.width, dmap.height) + vals.tobytes())
    else:
        raise FormatError(f"unknown disparity format {fmt!r}")


# -- masks ------------------------------------------------------------------------

def read_mask(path) -> RoadMask:
    """8-bit PGM (or any greyscale image Pillow opens); nonzero = member."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        arr, _ = _read_pgm(path)
    else:
        try:
            arr = np.asarray(Image.open(path).convert("L"))
        except (OSError, ValueError) as exc:
            raise ParseError(f"{path}: {exc}") from None
    return RoadMask(arr != 0)


def write_mask(mask, path) -> None:
    member = mask.member if isinstance(mask, RoadMask) else np.asarray(mask, dtype=bool)
    _write_pgm(path, np.where(member, 255, 0), 255)


# -- segmentation -----------------------------------------------------------------

def overlay(result, base=None) -> np.ndarray:
    """RGB image: undamaged road purple, damage red, everything else from ``base``."""
    h, w = result.damage.shape
    if base is None:
        rgb = np.zeros((h, w, 3), dtype=np.uint8)
    else:
        base = np.asarray(base)
        if base.shape[:2] != (h, w):
            raise ValueError(f"base image {base.shape[:2]} does not match {(h, w)}")
        if base.ndim == 2:
            base = np.repeat(base[:, :, None], 3, axis=2)
        rgb = np.array(base[:, :, :3], dtype=np.uint8)
    rgb[result.region & ~result.damage] = PURPLE
    rgb[result.damage] = RED
    return rgb


def write_segmentation(result, path, base=None, mask_path=None) -> tuple[Path, Path]:
    """Save the colour overlay (PNG) and the raw damage mask (8-bit PGM).

    The mask goes next to the overlay as ``<stem>_mask.pgm`` unless
    ``mask_path`` is given.
    """
    path = Path(path)
    mask_path = Path(mask_path) if mask_path else path.with_name(path.stem + "_mask.pgm")
    Image.fromarray(overlay(result, base)).save(path, format="PNG")
    write_mask(result.damage, mask_path)
    return path, mask_path
