"""Loader, color conversion and histogram tests, checked against hand-built
files and a colorsys oracle."""

import colorsys

import numpy as np
import pytest

from cbir.errors import (
    CorruptDataError,
    DimensionMismatchError,
    UndefinedInputError,
    UnsupportedFormatError,
)
from cbir.image import (
    Histogram,
    Image,
    cdf,
    histogram,
    load_image,
    opponent_transform,
    rgb_to_hsv,
    to_grayscale,
)
from cbir.synth import write_pgm, write_png, write_ppm


def test_image_validates_dtype_and_shape():
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4), dtype=np.float64))
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        Image(np.zeros((0, 4), dtype=np.uint8))


def test_image_squeezes_single_channel_axis():
    img = Image(np.zeros((4, 5, 1), dtype=np.uint8))
    assert img.pixels.shape == (4, 5)
    assert img.channels == 1


def test_from_array_rejects_out_of_range():
    with pytest.raises(ValueError):
        Image.from_array(np.array([[-1, 0]]))
    with pytest.raises(ValueError):
        Image.from_array(np.array([[0, 256]]))
    with pytest.raises(DimensionMismatchError):
        Image.from_array(np.zeros((3, 3)), channels=3)


def test_pgm_binary_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    a = rng.integers(0, 256, size=(9, 7), dtype=np.uint8)
    p = tmp_path / "a.pgm"
    write_pgm(p, a)
    img = load_image(p)
    assert img.channels == 1
    assert np.array_equal(img.pixels, a)


def test_ppm_binary_round_trip(tmp_path):
    rng = np.random.default_rng(12)
    a = rng.integers(0, 256, size=(6, 8, 3), dtype=np.uint8)
    p = tmp_path / "a.ppm"
    write_ppm(p, a)
    img = load_image(p)
    assert img.channels == 3
    assert np.array_equal(img.pixels, a)


def test_pgm_ascii_with_comments(tmp_path):
    p = tmp_path / "a.pgm"
    p.write_bytes(b"P2\n# width height\n3 2\n# maxval next\n255\n0 128 255\n10 20 30\n")
    img = load_image(p)
    assert np.array_equal(img.pixels, [[0, 128, 255], [10, 20, 30]])


def test_ppm_ascii(tmp_path):
    p = tmp_path / "a.ppm"
    p.write_bytes(b"P3\n2 1\n255\n255 0 0  0 0 255\n")
    img = load_image(p)
    assert np.array_equal(img.pixels, [[[255, 0, 0], [0, 0, 255]]])


def test_sixteen_bit_pgm_rescales_by_integer_division(tmp_path):
    # v * 255 // 65535: 0 -> 0, 257 -> 1, 65535 -> 255
    p = tmp_path / "deep.pgm"
    samples = np.array([0, 257, 65535], dtype=">u2")
    p.write_bytes(b"P5\n3 1\n65535\n" + samples.tobytes())
    img = load_image(p)
    assert np.array_equal(img.pixels, [[0, 1, 255]])


def test_truncated_raster_is_corrupt(tmp_path):
    p = tmp_path / "short.pgm"
    p.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(CorruptDataError):
        load_image(p)


def test_ascii_sample_above_maxval_is_corrupt(tmp_path):
    p = tmp_path / "over.pgm"
    p.write_bytes(b"P2\n2 1\n100\n5 101\n")
    with pytest.raises(CorruptDataError):
        load_image(p)


def test_bad_magic_is_corrupt(tmp_path):
    p = tmp_path / "bad.pgm"
    p.write_bytes(b"P7\n2 2\n255\n\x00\x00\x00\x00")
    with pytest.raises(CorruptDataError):
        load_image(p)


def test_unknown_extension_is_unsupported(tmp_path):
    p = tmp_path / "a.gif"
    p.write_bytes(b"GIF89a")
    with pytest.raises(UnsupportedFormatError):
        load_image(p)


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_image("/no/such/file.pgm")


def test_png_round_trip(tmp_path):
    rng = np.random.default_rng(13)
    a = rng.integers(0, 256, size=(5, 6, 3), dtype=np.uint8)
    p = tmp_path / "a.png"
    write_png(p, a)
    assert np.array_equal(load_image(p).pixels, a)


def test_png_gray_round_trip(tmp_path):
    a = np.arange(30, dtype=np.uint8).reshape(5, 6)
    p = tmp_path / "g.png"
    write_png(p, a)
    img = load_image(p)
    assert img.channels == 1
    assert np.array_equal(img.pixels, a)


def test_rgba_png_converts_to_rgb(tmp_path):
    from PIL import Image as PilImage

    rgba = np.zeros((4, 4, 4), dtype=np.uint8)
    rgba[:, :, 0] = 200
    rgba[:, :, 3] = 255
    p = tmp_path / "a.png"
    PilImage.fromarray(rgba, mode="RGBA").save(p)
    img = load_image(p)
    assert img.channels == 3
    assert np.array_equal(img.pixels[:, :, 0], np.full((4, 4), 200))


def test_corrupt_png_payload(tmp_path):
    p = tmp_path / "b.png"
    p.write_bytes(b"\x89PNG\r\n\x1a\nnot really a png")
    with pytest.raises(CorruptDataError):
        load_image(p)


def test_grayscale_matches_weighted_sum():
    rng = np.random.default_rng(21)
    a = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
    gray = to_grayscale(Image(a)).pixels
    expected = np.floor(
        0.299 * a[:, :, 0] + 0.587 * a[:, :, 1] + 0.114 * a[:, :, 2] + 0.5
    ).astype(np.uint8)
    assert np.array_equal(gray, expected)


def test_grayscale_passthrough_for_single_channel():
    img = Image(np.full((3, 3), 7, dtype=np.uint8))
    assert to_grayscale(img) is img


def test_hsv_matches_colorsys():
    rng = np.random.default_rng(31)
    triples = rng.integers(0, 256, size=(200, 3), dtype=np.uint8)
    corners = np.array(
        [
            [0, 0, 0],
            [255, 255, 255],
            [255, 0, 0],
            [0, 255, 0],
            [0, 0, 255],
            [128, 128, 128],
            [255, 255, 0],
        ],
        dtype=np.uint8,
    )
    pixels = np.vstack([triples, corners]).reshape(1, -1, 3)
    hsv = rgb_to_hsv(Image(pixels))
    for i, (r, g, b) in enumerate(pixels[0]):
        h, s, v = colorsys.rgb_to_hsv(r / 255.0, g / 255.0, b / 255.0)
        want_h = (h * 360.0) % 360.0
        got_h = hsv[0, i, 0]
        dh = min(abs(got_h - want_h), 360.0 - abs(got_h - want_h))
        assert dh < 1e-9
        assert abs(hsv[0, i, 1] - s) < 1e-9
        assert abs(hsv[0, i, 2] - v) < 1e-9


def test_hsv_achromatic_hue_is_zero():
    img = Image(np.full((2, 2, 3), 90, dtype=np.uint8))
    hsv = rgb_to_hsv(img)
    assert np.array_equal(hsv[:, :, 0], np.zeros((2, 2)))
    assert np.array_equal(hsv[:, :, 1], np.zeros((2, 2)))


def test_hsv_requires_three_channels():
    with pytest.raises(DimensionMismatchError):
        rgb_to_hsv(Image(np.zeros((2, 2), dtype=np.uint8)))


def test_opponent_axes():
    img = Image(np.array([[[10, 40, 100]]], dtype=np.uint8))
    opp = opponent_transform(img)
    assert opp[0, 0, 0] == 10 - 40
    assert opp[0, 0, 1] == 2 * 100 - 10 - 40
    assert opp[0, 0, 2] == 10 + 40 + 100


def test_histogram_counts_and_binning():
    img = Image(np.array([[0, 31, 32, 255]], dtype=np.uint8))
    h = histogram(img, bins=8)
    # floor(v * 8 / 256): 0 -> 0, 31 -> 0, 32 -> 1, 255 -> 7
    assert np.array_equal(h.bins, [2, 1, 0, 0, 0, 0, 0, 1])
    assert h.total == 4
    assert len(h) == 8


def test_histogram_full_resolution_matches_bincount():
    rng = np.random.default_rng(41)
    a = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
    h = histogram(Image(a))
    assert np.array_equal(h.bins, np.bincount(a.ravel(), minlength=256))


def test_histogram_rejects_color_and_tiny_bins():
    with pytest.raises(DimensionMismatchError):
        histogram(Image(np.zeros((2, 2, 3), dtype=np.uint8)))
    with pytest.raises(ValueError):
        histogram(Image(np.zeros((2, 2), dtype=np.uint8)), bins=1)


def test_cdf_is_monotone_and_ends_at_one():
    rng = np.random.default_rng(42)
    a = rng.integers(0, 256, size=(10, 10), dtype=np.uint8)
    curve = cdf(histogram(Image(a)))
    assert np.all(np.diff(curve.values) >= 0)
    assert curve.values[-1] == pytest.approx(1.0, abs=1e-12)


def test_cdf_of_empty_histogram_is_undefined():
    with pytest.raises(UndefinedInputError):
        cdf(Histogram(np.zeros(256, dtype=np.int64)))
