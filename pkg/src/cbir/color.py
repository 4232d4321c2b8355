"""Color block of the feature vector: quantized HSV histogram and channel moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedInputError
from .image import Image, rgb_to_hsv

DEFAULT_HSV_GRID = (8, 3, 3)

# Hue-band centers (degrees) for color-proportion queries.
HUE_TABLE = {
    "red": 0.0,
    "orange": 30.0,
    "yellow": 60.0,
    "green": 120.0,
    "cyan": 180.0,
    "blue": 240.0,
    "purple": 270.0,
    "magenta": 300.0,
}


@dataclass(frozen=True)
class ColorHistogramFeature:
    """Normalized pixel fractions over an H x S x V quantization grid (flattened)."""

    bins: np.ndarray
    grid: tuple[int, int, int]


@dataclass(frozen=True)
class ColorMomentsFeature:
    """Per RGB channel: mean, population std, cube root of the third central moment."""

    mean: np.ndarray  # length 3
    std: np.ndarray
    skew: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.mean, self.std, self.skew])


def _grid_index(h, s, v, grid):
    """Map HSV values to flat bin indices; S = 1 and V = 1 clamp to the top bin."""
    nh, ns, nv = grid
    hi = np.minimum(np.floor(h * nh / 360.0).astype(np.int64), nh - 1)
    si = np.minimum(np.floor(s * ns).astype(np.int64), ns - 1)
    vi = np.minimum(np.floor(v * nv).astype(np.int64), nv - 1)
    return (hi * ns + si) * nv + vi


def hsv_histogram(img: Image, grid: tuple[int, int, int] = DEFAULT_HSV_GRID) -> ColorHistogramFeature:
    """Fraction of pixels falling in each cell of the HSV grid."""
    if any(n < 1 for n in grid):
        raise ValueError(f"every grid dimension must be >= 1, got {grid}")
    hsv = rgb_to_hsv(img)
    n = img.width * img.height
    if n == 0:
        raise UndefinedInputError("cannot build a color histogram of a zero-pixel image")
    idx = _grid_index(hsv[:, :, 0].ravel(), hsv[:, :, 1].ravel(), hsv[:, :, 2].ravel(), grid)
    nbins = grid[0] * grid[1] * grid[2]
    counts = np.bincount(idx, minlength=nbins)
    return ColorHistogramFeature(counts / float(n), tuple(grid))


def color_moments(img: Image) -> ColorMomentsFeature:
    """First three distribution moments of each RGB channel.

    std is the population standard deviation; the skew feature is the cube root
    of the third central moment so all nine numbers share intensity units.
    """
    if img.channels != 1 and img.channels != 3:
        raise ValueError("image must have 1 or 3 channels")
    px = img.pixels.astype(np.float64)
    if px.ndim == 2:
        px = np.stack([px, px, px], axis=2)
    flat = px.reshape(-1, 3)
    if flat.shape[0] == 0:
        raise UndefinedInputError("cannot compute moments of a zero-pixel image")
    mean = flat.mean(axis=0)
    centered = flat - mean
    std = np.sqrt((centered**2).mean(axis=0))
    skew = np.cbrt((centered**3).mean(axis=0))
    return ColorMomentsFeature(mean, std, skew)


def histogram_from_proportions(
    proportions, grid: tuple[int, int, int] = DEFAULT_HSV_GRID
) -> ColorHistogramFeature:
    """Build a target histogram from named-color fractions, e.g. {"blue": 0.51}.

    Each named fraction lands in the bin holding that hue center at top
    saturation/value; leftover mass is spread uniformly over all bins.
    """
    items = list(proportions.items()) if isinstance(proportions, dict) else list(proportions)
    total = 0.0
    nbins = grid[0] * grid[1] * grid[2]
    bins = np.zeros(nbins)
    for name, frac in items:
        key = str(name).lower()
        if key not in HUE_TABLE:
            raise ValueError(f"unknown color name {name!r}; expected one of {sorted(HUE_TABLE)}")
        if frac < 0:
            raise ValueError(f"fraction for {name!r} must be >= 0")
        total += frac
        idx = _grid_index(np.array([HUE_TABLE[key]]), np.array([1.0]), np.array([1.0]), grid)[0]
        bins[idx] += frac
    if total > 1.0 + 1e-12:
        raise ValueError(f"color fractions sum to {total:.4f}, must be <= 1")
    bins += (1.0 - total) / nbins
    return ColorHistogramFeature(bins, tuple(grid))
