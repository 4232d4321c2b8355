"""Distances and similarities over images, histograms and feature vectors.

Pixel-level metrics (sum of absolute/squared differences, the stabilized mean
difference, cosine disparity), histogram metrics, Minkowski family, and the
composite overall similarity that averages per-block partial similarities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, UndefinedInputError, UnknownMetricError
from .image import Histogram, Image

PIXEL_DISTANCE_KINDS = ("abs", "squared", "euclidean")
METRIC_NAMES = ("l1", "l2", "minkowski", "histogram", "intersection", "osm", "spd", "cosine")


@dataclass(frozen=True)
class DiffStats:
    """Mean and sample standard deviation of per-pixel differences."""

    mean_diff: float
    sample_std: float
    n: int


@dataclass(frozen=True)
class SimilarityBreakdown:
    """Per-block partial similarities and their average."""

    e_texture: float
    e_intensity: float
    e_shape: float
    osm: float


@dataclass(frozen=True)
class BlockSlices:
    """Positions of the color, texture and shape blocks inside a feature vector."""

    color: slice
    texture: slice
    shape: slice

    def covers(self, length: int) -> bool:
        stops = [s.stop for s in (self.color, self.texture, self.shape)]
        return all(s is not None and s <= length for s in stops)


@dataclass(frozen=True)
class MetricSpec:
    """A parsed metric choice: name, Minkowski order if any, and direction."""

    name: str
    p: float | None = None

    @property
    def higher_is_better(self) -> bool:
        return self.name in ("intersection", "osm")

    def __str__(self) -> str:
        if self.name == "minkowski":
            return f"minkowski:{self.p:g}"
        return self.name


def parse_metric(text: str) -> MetricSpec:
    """Parse a metric name such as 'l2', 'osm' or 'minkowski:3'."""
    if text.startswith("minkowski:"):
        try:
            p = float(text.split(":", 1)[1])
        except ValueError:
            raise UnknownMetricError(f"bad minkowski order in {text!r}") from None
        if p < 1:
            raise UnknownMetricError(f"minkowski order must be >= 1, got {p}")
        return MetricSpec("minkowski", p)
    if text in ("l1", "l2", "histogram", "intersection", "osm", "spd", "cosine"):
        return MetricSpec(text)
    raise UnknownMetricError(f"unknown metric {text!r}; expected one of {', '.join(METRIC_NAMES)}")


def _check_same_shape(a: Image, b: Image) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatchError(
            f"images differ in shape: {a.pixels.shape} vs {b.pixels.shape}"
        )


def pixel_distance(a: Image, b: Image, kind: str = "euclidean") -> float:
    """Pixel-by-pixel gray-value distance: 'abs' sums |differences|, 'squared'
    sums squared differences, 'euclidean' is the square root of 'squared'."""
    if kind not in PIXEL_DISTANCE_KINDS:
        raise ValueError(f"kind must be one of {PIXEL_DISTANCE_KINDS}, got {kind!r}")
    if a.channels != 1 or b.channels != 1:
        raise ValueError("pixel_distance compares 1-channel images")
    _check_same_shape(a, b)
    d = a.pixels.astype(np.int64) - b.pixels.astype(np.int64)
    if kind == "abs":
        return float(np.abs(d).sum())
    squared = float((d * d).sum())
    if kind == "squared":
        return squared
    return math.sqrt(squared)


def diff_stats(a: Image, b: Image) -> DiffStats:
    """Mean and sample std (divisor n-1) of the per-pixel differences a - b."""
    if a.channels != 1 or b.channels != 1:
        raise ValueError("diff_stats compares 1-channel images")
    _check_same_shape(a, b)
    d = a.pixels.astype(np.float64) - b.pixels.astype(np.float64)
    n = d.size
    if n < 2:
        raise UndefinedInputError(f"sample variance needs at least 2 pixels, got {n}")
    mean = float(d.mean())
    sample_std = math.sqrt(float(((d - mean) ** 2).sum()) / (n - 1))
    return DiffStats(mean_diff=mean, sample_std=sample_std, n=n)


def stabilized_pixel_distance(a: Image, b: Image) -> float:
    """sqrt(n) * |mean difference| / sample std. Zero spread means the images
    differ by a constant: 0 if that constant is 0, else infinity."""
    stats = diff_stats(a, b)
    if stats.sample_std == 0:
        return 0.0 if stats.mean_diff == 0 else math.inf
    return math.sqrt(stats.n) * abs(stats.mean_diff) / stats.sample_std


def vector_disparity(a: Image, b: Image) -> float:
    """1 - cosine of the angle between the flattened pixel vectors; 0 for equal
    images, up to 2 in principle (pixel vectors are nonnegative, so <= 1 here)."""
    _check_same_shape(a, b)
    va = a.pixels.astype(np.float64).ravel()
    vb = b.pixels.astype(np.float64).ravel()
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0 or nb == 0:
        raise UndefinedInputError("all-black image has a zero pixel vector; angle undefined")
    return 1.0 - float(va @ vb) / (na * nb)


def histogram_distance(h1: Histogram, h2: Histogram) -> float:
    """Euclidean distance between bin-count vectors."""
    if len(h1.bins) != len(h2.bins):
        raise DimensionMismatchError(
            f"histograms differ in bin count: {len(h1.bins)} vs {len(h2.bins)}"
        )
    d = h1.bins.astype(np.float64) - h2.bins.astype(np.float64)
    return math.sqrt(float((d * d).sum()))


def histogram_intersection(h1: np.ndarray, h2: np.ndarray) -> float:
    """Sum of bin-wise minima of two normalized histograms; 1 iff identical."""
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    if h1.shape != h2.shape:
        raise DimensionMismatchError(f"histograms differ in length: {h1.shape} vs {h2.shape}")
    for name, h in (("first", h1), ("second", h2)):
        if abs(float(h.sum()) - 1.0) > 1e-6:
            raise UndefinedInputError(f"{name} histogram is not normalized (sum {h.sum():.8f})")
    return float(np.minimum(h1, h2).sum())


def minkowski(u: np.ndarray, v: np.ndarray, p: float) -> float:
    """Order-p Minkowski distance (p=1 city block, p=2 Euclidean)."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"vectors differ in length: {u.shape} vs {v.shape}")
    if p < 1:
        raise ValueError(f"minkowski order must be >= 1, got {p}")
    d = u - v
    if p == 1:
        return float(np.abs(d).sum())
    if p == 2:
        return math.sqrt(float((d * d).sum()))
    return float((np.abs(d) ** p).sum() ** (1.0 / p))


def osm(query_fv: np.ndarray, db_fv: np.ndarray, blocks: BlockSlices) -> SimilarityBreakdown:
    """Overall similarity: per block (texture, intensity=color, shape) compute the
    Euclidean distance d and the partial similarity E = 1/(1+d); average the three."""
    query_fv = np.asarray(query_fv, dtype=np.float64)
    db_fv = np.asarray(db_fv, dtype=np.float64)
    if query_fv.shape != db_fv.shape:
        raise DimensionMismatchError(
            f"feature vectors differ in length: {query_fv.shape} vs {db_fv.shape}"
        )
    if not blocks.covers(len(query_fv)):
        raise DimensionMismatchError("block layout exceeds feature vector length")
    e = {}
    for label, s in (("texture", blocks.texture), ("intensity", blocks.color), ("shape", blocks.shape)):
        d = minkowski(query_fv[s], db_fv[s], 2)
        e[label] = 1.0 / (1.0 + d)
    return SimilarityBreakdown(
        e_texture=e["texture"],
        e_intensity=e["intensity"],
        e_shape=e["shape"],
        osm=(e["texture"] + e["intensity"] + e["shape"]) / 3.0,
    )
