"""Shape block of the feature vector.

Segments a single foreground object (Otsu threshold, smaller side wins, largest
4-connected component), then computes region moments (log-scaled Hu invariants)
and boundary Fourier descriptors (normalized harmonic magnitudes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import NoShapeError, UndefinedInputError
from .image import Image, histogram

DEFAULT_FOURIER_HARMONICS = 10
BOUNDARY_SAMPLES = 128
LOG_FLOOR = 1e-30

# Moore neighborhood in (dx, dy), clockwise starting west (y grows downward).
_MOORE = (
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
)


@dataclass(frozen=True)
class Mask:
    """Boolean foreground bitmap of a segmented object."""

    bitmap: np.ndarray  # bool, (height, width)

    def __post_init__(self) -> None:
        if self.bitmap.ndim != 2 or self.bitmap.dtype != np.bool_:
            raise ValueError("mask bitmap must be a 2-d bool array")

    @property
    def width(self) -> int:
        return self.bitmap.shape[1]

    @property
    def height(self) -> int:
        return self.bitmap.shape[0]

    @property
    def foreground_count(self) -> int:
        return int(self.bitmap.sum())


@dataclass(frozen=True)
class ShapeFeature:
    hu: np.ndarray  # 7 log-scaled moment invariants
    fourier: np.ndarray  # K normalized harmonic magnitudes, fourier[0] == 1

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.hu, self.fourier])


def otsu_threshold(img: Image) -> int:
    """Threshold t maximizing between-class variance of gray values (<= t vs > t).

    Ties take the smallest t. Raises if the image has a single gray level.
    """
    if img.channels != 1:
        raise ValueError("otsu_threshold requires a 1-channel image")
    counts = histogram(img, bins=256).bins.astype(np.float64)
    total = counts.sum()
    omega0 = counts.cumsum() / total
    mean_cum = (counts * np.arange(256)).cumsum() / total
    mean_all = mean_cum[-1]
    omega1 = 1.0 - omega0
    with np.errstate(divide="ignore", invalid="ignore"):
        between = np.where(
            (omega0 > 0) & (omega1 > 0),
            (mean_all * omega0 - mean_cum) ** 2 / (omega0 * omega1),
            -1.0,
        )
    if between.max() < 0:
        raise NoShapeError("image has a single gray level; nothing to segment")
    return int(between.argmax())


def segment(img: Image) -> Mask:
    """Foreground mask: Otsu split, fewer-pixels side is the object (darker side
    on a tie), reduced to its largest 4-connected component."""
    t = otsu_threshold(img)
    low = img.pixels <= t
    n_low = int(low.sum())
    n_high = low.size - n_low
    fg = low if n_low <= n_high else ~low
    labels, n = ndimage.label(fg)
    if n == 0:
        raise NoShapeError("no foreground pixels after thresholding")
    if n > 1:
        sizes = ndimage.sum_labels(fg, labels, index=np.arange(1, n + 1))
        fg = labels == (int(sizes.argmax()) + 1)
    return Mask(bitmap=fg)


def _central_moment(dx: np.ndarray, dy: np.ndarray, p: int, q: int) -> float:
    return float((dx**p * dy**q).sum())


def hu_moments(mask: Mask) -> np.ndarray:
    """Seven Hu invariants of the foreground region, each log-scaled as
    sign(phi) * log10(|phi| + 1e-30) so magnitudes are comparable."""
    if mask.foreground_count < 1:
        raise NoShapeError("empty mask has no moments")
    ys, xs = np.nonzero(mask.bitmap)
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    n = float(len(xs))

    def eta(p: int, q: int) -> float:
        return _central_moment(dx, dy, p, q) / n ** (1.0 + (p + q) / 2.0)

    e20, e02, e11 = eta(2, 0), eta(0, 2), eta(1, 1)
    e30, e03, e21, e12 = eta(3, 0), eta(0, 3), eta(2, 1), eta(1, 2)
    a = e30 + e12
    b = e21 + e03
    c = e30 - 3 * e12
    d = 3 * e21 - e03
    phi = np.array(
        [
            e20 + e02,
            (e20 - e02) ** 2 + 4 * e11**2,
            c**2 + d**2,
            a**2 + b**2,
            c * a * (a**2 - 3 * b**2) + d * b * (3 * a**2 - b**2),
            (e20 - e02) * (a**2 - b**2) + 4 * e11 * a * b,
            d * a * (a**2 - 3 * b**2) - c * b * (3 * a**2 - b**2),
        ]
    )
    return np.sign(phi) * np.log10(np.abs(phi) + LOG_FLOOR)


def trace_boundary(mask: Mask) -> np.ndarray:
    """Outer boundary as an (m, 2) array of (x, y), clockwise, starting from the
    topmost then leftmost foreground pixel (Moore-neighbor tracing).

    The trace is a deterministic walk over (pixel, scan-direction) states, so one
    full cycle is detected exactly: it ends when a scan state at the start pixel
    repeats. Pixels on one-pixel-wide necks legitimately appear twice.
    """
    bitmap = mask.bitmap
    if mask.foreground_count == 0:
        raise NoShapeError("empty mask has no boundary")
    ys, xs = np.nonzero(bitmap)
    start = (int(xs[ys == ys.min()].min()), int(ys.min()))
    h, w = bitmap.shape

    def is_fg(x: int, y: int) -> bool:
        return 0 <= x < w and 0 <= y < h and bool(bitmap[y, x])

    points = [start]
    current = start
    scan_from = 0  # the west neighbor of the start pixel is background
    seen_at_start = {scan_from: 0}
    limit = 4 * len(xs) + 32
    while True:
        hit = -1
        for step in range(8):
            k = (scan_from + step) % 8
            nx, ny = current[0] + _MOORE[k][0], current[1] + _MOORE[k][1]
            if is_fg(nx, ny):
                hit = k
                break
        if hit < 0:
            break  # isolated single pixel
        current = (nx, ny)
        # resume scanning at the background neighbor examined just before the
        # hit, re-expressed relative to the new pixel
        scan_from = (2 * (hit // 2) + 6) % 8
        if current == start:
            if scan_from in seen_at_start:
                return np.array(points[seen_at_start[scan_from] :], dtype=np.float64)
            seen_at_start[scan_from] = len(points)
        points.append(current)
        if len(points) > limit:
            raise NoShapeError("boundary tracing did not terminate")
    return np.array(points, dtype=np.float64)


def _resample_closed(points: np.ndarray, n: int) -> np.ndarray:
    """Resample a closed polygon to n points equally spaced by arc length."""
    closed = np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(closed, axis=0), axis=1)
    cum = np.concatenate([[0.0], seg.cumsum()])
    total = cum[-1]
    if total == 0:
        raise NoShapeError("degenerate boundary with zero perimeter")
    targets = np.arange(n) * total / n
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0)
    return closed[idx] + frac[:, None] * (closed[idx + 1] - closed[idx])


def fourier_descriptors(mask: Mask, k: int = DEFAULT_FOURIER_HARMONICS) -> np.ndarray:
    """First k normalized harmonic magnitudes |F(i)| / |F(1)|, i = 1..k, of the
    boundary resampled to 128 points. Translation, scale, rotation and start
    point all drop out, so descriptor[0] is exactly 1."""
    if k < 2:
        raise ValueError(f"harmonic count must be >= 2, got {k}")
    boundary = trace_boundary(mask)
    if len(boundary) < 8:
        raise NoShapeError(f"boundary has {len(boundary)} points; need at least 8")
    samples = _resample_closed(boundary, BOUNDARY_SAMPLES)
    z = samples[:, 0] + 1j * samples[:, 1]
    spectrum = np.fft.fft(z)
    ref = np.abs(spectrum[1])
    if ref == 0:
        raise UndefinedInputError("first harmonic is zero; descriptors undefined")
    return np.abs(spectrum[1 : k + 1]) / ref


def shape_features(img: Image, k: int = DEFAULT_FOURIER_HARMONICS) -> ShapeFeature:
    """Segment and describe the single foreground object of a grayscale image."""
    mask = segment(img)
    return ShapeFeature(hu=hu_moments(mask), fourier=fourier_descriptors(mask, k))
