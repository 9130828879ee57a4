import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from roadseg.core import DisparityMap, RoadMask
from roadseg.errors import EmptyMap, FormatError, ParseError, RangeError
from roadseg.io import (FORMATS, MAGIC, PURPLE, RED, guess_format, overlay, read_disparity,
                        read_mask, write_disparity, write_mask, write_segmentation)
from roadseg.segmentation import SegmentationResult

SUFFIX = {"uint16-png-div256": ".png", "pgm16-div256": ".pgm", "csv-real": ".csv",
          "binary-f64-grid": ".dspf"}


def sample_map():
    vals = np.array([[1.0, 2.5, 0.0], [100.25, 3.0, 7.75]])
    valid = np.array([[1, 1, 0], [1, 1, 1]], bool)
    return DisparityMap(vals, valid)


def test_guess_format():
    assert guess_format("a/b.PNG") == "uint16-png-div256"
    assert guess_format("x.csv") == "csv-real"
    with pytest.raises(FormatError):
        guess_format("x.tiff")


def test_pgm16_decoding(tmp_path):
    p = tmp_path / "d.pgm"
    p.write_bytes(b"P5\n# comment\n2 1\n65535\n" + struct.pack(">HH", 256, 0))
    dm = read_disparity(p)
    assert dm.values.tolist() == [[1.0, 0.0]]
    assert dm.valid.tolist() == [[True, False]]


def test_csv_decoding(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.5,2.5\n3.5,-1\n")
    dm = read_disparity(p)
    assert dm.values.tolist() == [[1.5, 2.5], [3.5, 0.0]]
    assert dm.valid.tolist() == [[True, True], [True, False]]


@pytest.mark.parametrize("fmt", FORMATS)
def test_round_trip(tmp_path, fmt):
    dm = sample_map()
    p = tmp_path / ("m" + SUFFIX[fmt])
    write_disparity(dm, p, fmt)
    assert read_disparity(p, fmt) == dm


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=6, max_size=6))
def test_float_formats_bit_exact(tmp_path_factory, values):
    dm = DisparityMap.from_array(np.array(values).reshape(2, 3))
    d = tmp_path_factory.mktemp("rt")
    for fmt in ("csv-real", "binary-f64-grid"):
        p = d / ("m" + SUFFIX[fmt])
        write_disparity(dm, p, fmt)
        back = read_disparity(p, fmt)
        assert np.array_equal(back.values, dm.values) and np.array_equal(back.valid, dm.valid)


def test_png_is_16_bit(tmp_path):
    p = tmp_path / "d.png"
    write_disparity(sample_map(), p)
    img = Image.open(p)
    assert img.mode.startswith("I")
    assert np.asarray(img)[0, 1] == 640


def test_eight_bit_inputs_rejected(tmp_path):
    p = tmp_path / "d8.pgm"
    p.write_bytes(b"P5 2 1 255\n\x01\x02")
    with pytest.raises(FormatError):
        read_disparity(p)
    q = tmp_path / "d8.png"
    Image.fromarray(np.array([[1, 2]], np.uint8)).save(q)
    with pytest.raises(FormatError):
        read_disparity(q)


def test_unencodable_values(tmp_path):
    small = DisparityMap(np.array([[0.001, 5.0]]), np.ones((1, 2), bool))
    with pytest.raises(RangeError):
        write_disparity(small, tmp_path / "a.png")
    big = DisparityMap(np.array([[300.0]]), np.ones((1, 1), bool))
    with pytest.raises(RangeError):
        write_disparity(big, tmp_path / "a.pgm")


def test_malformed_inputs(tmp_path):
    bad_csv = tmp_path / "b.csv"
    bad_csv.write_text("1,2\n3,x\n")
    with pytest.raises(ParseError):
        read_disparity(bad_csv)
    bad_csv.write_text("1,2\n3\n")
    with pytest.raises(ParseError):
        read_disparity(bad_csv)
    bad_csv.write_text("\n")
    with pytest.raises(EmptyMap):
        read_disparity(bad_csv)
    bad_bin = tmp_path / "b.dspf"
    bad_bin.write_bytes(b"NOPE" + bytes(16))
    with pytest.raises(ParseError):
        read_disparity(bad_bin)
    bad_bin.write_bytes(MAGIC + struct.pack("<QQ", 2, 2) + bytes(8))
    with pytest.raises(ParseError):
        read_disparity(bad_bin)
    bad_bin.write_bytes(MAGIC + struct.pack("<QQ", 0, 3))
    with pytest.raises(EmptyMap):
        read_disparity(bad_bin)
    (tmp_path / "b.png").write_bytes(b"junk")
    with pytest.raises(ParseError):
        read_disparity(tmp_path / "b.png")


def test_mask_round_trip(tmp_path):
    member = np.array([[True, False, True], [False, False, True]])
    write_mask(RoadMask(member), tmp_path / "m.pgm")
    assert np.array_equal(read_mask(tmp_path / "m.pgm").member, member)
    Image.fromarray(np.where(member, 200, 0).astype(np.uint8)).save(tmp_path / "m.png")
    assert np.array_equal(read_mask(tmp_path / "m.png").member, member)


def seg_result():
    region = np.array([[1, 1, 1], [1, 0, 0]], bool)
    damage = np.array([[1, 0, 0], [0, 0, 0]], bool)
    return SegmentationResult(damage, region, 1.0, 0.5, 1, 3)


def test_overlay_colours():
    rgb = overlay(seg_result(), base=np.full((2, 3), 40, np.uint8))
    assert tuple(rgb[0, 0]) == RED
    assert tuple(rgb[0, 1]) == PURPLE and tuple(rgb[1, 0]) == PURPLE
    assert tuple(rgb[1, 2]) == (40, 40, 40)
    flat = rgb.reshape(-1, 3).tolist()
    assert flat.count(list(RED)) == 1 and flat.count(list(PURPLE)) == 3
    with pytest.raises(ValueError):
        overlay(seg_result(), base=np.zeros((3, 3)))


def test_write_segmentation(tmp_path):
    png, pgm = write_segmentation(seg_result(), tmp_path / "seg.png")
    assert pgm.name == "seg_mask.pgm"
    assert np.asarray(Image.open(png)).shape == (2, 3, 3)
    assert read_mask(pgm).member.tolist() == [[True, False, False], [False, False, False]]
