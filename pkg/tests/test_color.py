"""Color histogram and moment tests against per-pixel reference loops."""

import numpy as np
import pytest

from cbir.color import (
    ColorMomentsFeature,
    color_moments,
    histogram_from_proportions,
    hsv_histogram,
)
from cbir.image import Image, rgb_to_hsv


def reference_bins(img, grid):
    """Independent per-pixel binning loop over the converted HSV values."""
    nh, ns, nv = grid
    hsv = rgb_to_hsv(img)
    flat = hsv.reshape(-1, 3)
    counts = np.zeros(nh * ns * nv)
    for h, s, v in flat:
        hi = min(int(h * nh // 360), nh - 1)
        si = min(int(s * ns), ns - 1)
        vi = min(int(v * nv), nv - 1)
        counts[(hi * ns + si) * nv + vi] += 1
    return counts / float(len(flat))


def test_hsv_histogram_matches_reference_loop():
    rng = np.random.default_rng(53)
    img = Image(rng.integers(0, 256, size=(12, 9, 3), dtype=np.uint8))
    for grid in ((8, 3, 3), (4, 4, 4), (16, 2, 2)):
        feature = hsv_histogram(img, grid)
        assert feature.grid == grid
        assert np.array_equal(feature.bins, reference_bins(img, grid))


def test_hsv_histogram_primary_colors_land_in_known_cells():
    px = np.array(
        [[[255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 255]]], dtype=np.uint8
    )
    bins = hsv_histogram(Image(px), (8, 3, 3)).bins
    # hue bins 0/2/5 at full saturation and value; white is s=0, v=1
    want = np.zeros(72)
    want[(0 * 3 + 2) * 3 + 2] = 0.25  # red
    want[(2 * 3 + 2) * 3 + 2] = 0.25  # green
    want[(5 * 3 + 2) * 3 + 2] = 0.25  # blue
    want[(0 * 3 + 0) * 3 + 2] = 0.25  # white
    assert np.array_equal(bins, want)


def test_hsv_histogram_sums_to_one():
    rng = np.random.default_rng(54)
    img = Image(rng.integers(0, 256, size=(7, 5, 3), dtype=np.uint8))
    assert hsv_histogram(img).bins.sum() == pytest.approx(1.0, abs=1e-12)


def test_hsv_histogram_rejects_degenerate_grid():
    img = Image(np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        hsv_histogram(img, (0, 3, 3))


def test_color_moments_match_reference_sums():
    rng = np.random.default_rng(61)
    a = rng.integers(0, 256, size=(6, 4, 3), dtype=np.uint8)
    feats = color_moments(Image(a))
    for ch in range(3):
        values = [float(v) for v in a[:, :, ch].ravel()]
        n = len(values)
        mean = sum(values) / n
        var = sum((v - mean) ** 2 for v in values) / n
        third = sum((v - mean) ** 3 for v in values) / n
        assert feats.mean[ch] == pytest.approx(mean, abs=1e-9)
        assert feats.std[ch] == pytest.approx(var**0.5, abs=1e-9)
        assert feats.skew[ch] == pytest.approx(np.cbrt(third), abs=1e-9)


def test_color_moments_vector_layout():
    f = ColorMomentsFeature(
        mean=np.array([1.0, 2.0, 3.0]),
        std=np.array([4.0, 5.0, 6.0]),
        skew=np.array([7.0, 8.0, 9.0]),
    )
    assert np.array_equal(f.as_vector(), np.arange(1.0, 10.0))


def test_color_moments_replicate_gray_channel():
    a = np.array([[10, 200], [60, 90]], dtype=np.uint8)
    feats = color_moments(Image(a))
    assert np.all(feats.mean == feats.mean[0])
    assert feats.mean[0] == pytest.approx(90.0)
    assert np.all(feats.std == feats.std[0])


def test_proportion_histogram_spreads_remainder():
    feature = histogram_from_proportions({"blue": 0.5}, (8, 3, 3))
    bins = feature.bins
    blue_idx = (5 * 3 + 2) * 3 + 2  # hue 240 at top saturation and value
    rest = 0.5 / 72
    assert bins[blue_idx] == pytest.approx(0.5 + rest, abs=1e-12)
    others = np.delete(bins, blue_idx)
    assert np.allclose(others, rest, atol=1e-12)
    assert bins.sum() == pytest.approx(1.0, abs=1e-12)


def test_proportion_histogram_validates_input():
    with pytest.raises(ValueError):
        histogram_from_proportions({"mauve": 0.5})
    with pytest.raises(ValueError):
        histogram_from_proportions({"blue": -0.1})
    with pytest.raises(ValueError):
        histogram_from_proportions({"blue": 0.7, "red": 0.4})
