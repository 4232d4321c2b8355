"""Texture block of the feature vector.

Co-occurrence statistics (contrast, dissimilarity, homogeneity, angular second
moment, entropy) averaged over a fixed offset set, plus Tamura coarseness,
contrast and directionality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UndefinedInputError
from .image import Image

DEFAULT_GLCM_LEVELS = 16
DEFAULT_GLCM_OFFSETS = ((1, 0), (0, 1), (1, 1), (1, -1))
DIRECTIONALITY_BINS = 16
GRADIENT_THRESHOLD = 12.0
MIN_TAMURA_SIZE = 32


@dataclass(frozen=True)
class CooccurrenceMatrix:
    """Symmetric joint distribution of gray-level pairs at one pixel offset."""

    p: np.ndarray  # (levels, levels), sums to 1
    levels: int
    offset: tuple[int, int]


@dataclass(frozen=True)
class TextureFeature:
    contrast: float
    dissimilarity: float
    homogeneity: float
    angular_second_moment: float
    entropy: float
    tamura_coarseness: float
    tamura_contrast: float
    tamura_directionality: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.contrast,
                self.dissimilarity,
                self.homogeneity,
                self.angular_second_moment,
                self.entropy,
                self.tamura_coarseness,
                self.tamura_contrast,
                self.tamura_directionality,
            ]
        )


def glcm(img: Image, offset: tuple[int, int], levels: int = DEFAULT_GLCM_LEVELS) -> CooccurrenceMatrix:
    """Normalized co-occurrence matrix for one (dx, dy) displacement.

    Values are requantized to `levels` gray levels (floor(v * levels / 256));
    every in-bounds pair is counted in both directions, so p is symmetric.
    """
    if img.channels != 1:
        raise ValueError("glcm requires a 1-channel image")
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    dx, dy = offset
    q = img.pixels.astype(np.int64) * levels // 256
    h, w = q.shape
    y0, y1 = max(0, -dy), h - max(0, dy)
    x0, x1 = max(0, -dx), w - max(0, dx)
    if y1 <= y0 or x1 <= x0:
        raise UndefinedInputError(f"image {w}x{h} has no pixel pairs at offset {offset}")
    a = q[y0:y1, x0:x1].ravel()
    b = q[y0 + dy : y1 + dy, x0 + dx : x1 + dx].ravel()
    counts = np.bincount(a * levels + b, minlength=levels * levels).reshape(levels, levels)
    sym = counts + counts.T
    return CooccurrenceMatrix(sym / sym.sum(), levels, (dx, dy))


def glcm_features(m: CooccurrenceMatrix) -> np.ndarray:
    """[contrast, dissimilarity, homogeneity, angular second moment, entropy]."""
    p = m.p
    i, j = np.indices(p.shape)
    diff = i - j
    contrast = float((p * diff**2).sum())
    dissimilarity = float((p * np.abs(diff)).sum())
    homogeneity = float((p / (1.0 + diff**2)).sum())
    asm = float((p**2).sum())
    nz = p[p > 0]
    entropy = -float((nz * np.log(nz)).sum()) + 0.0  # avoid -0.0 for one-cell mass
    return np.array([contrast, dissimilarity, homogeneity, asm, entropy])


def _integral(f: np.ndarray) -> np.ndarray:
    s = np.zeros((f.shape[0] + 1, f.shape[1] + 1))
    s[1:, 1:] = f.cumsum(axis=0).cumsum(axis=1)
    return s


def _coarseness(f: np.ndarray) -> float:
    """Mean over pixels of 2**k, where the window scale k in [0, 5] maximizes the
    difference of neighborhood averages on either side; ties take the smallest k."""
    h, w = f.shape
    pad = 34  # covers the largest window half (16) plus the largest step (16)
    fp = np.pad(f, pad, mode="edge")
    s = _integral(fp)

    best_e = np.full((h, w), -1.0)
    best_k = np.zeros((h, w), dtype=np.int64)
    for k in range(6):
        win = 2**k
        step = 1 if k == 0 else 2 ** (k - 1)
        tl = (s[win:, win:] - s[:-win, win:] - s[win:, :-win] + s[:-win, :-win]) / (win * win)

        # tl[r, c] is the window mean with top-left (r, c); recentre so that
        # center[step + i, step + j] is the window around original pixel (i, j),
        # leaving a margin of `step` on every side for the shifted differences.
        r0 = pad - win // 2 - step
        center = tl[r0 : r0 + h + 2 * step, r0 : r0 + w + 2 * step]
        eh = np.abs(center[step : step + h, 2 * step :] - center[step : step + h, : -2 * step])
        ev = np.abs(center[2 * step :, step : step + w] - center[: -2 * step, step : step + w])
        e = np.maximum(eh, ev)
        better = e > best_e
        best_k = np.where(better, k, best_k)
        best_e = np.where(better, e, best_e)
    return float((2.0**best_k).mean())


def _tamura_contrast(f: np.ndarray) -> float:
    sigma = f.std()
    if sigma == 0:
        return 0.0
    mu4 = ((f - f.mean()) ** 4).mean()
    kurtosis = mu4 / sigma**4
    return float(sigma / kurtosis**0.25)


def _directionality(f: np.ndarray) -> float:
    """Resultant length of the doubled gradient-angle histogram; 1 means one
    dominant edge orientation, 0 means none (or no strong gradients at all)."""
    gh = (
        f[:-2, 2:] + f[1:-1, 2:] + f[2:, 2:] - f[:-2, :-2] - f[1:-1, :-2] - f[2:, :-2]
    ) / 3.0
    gv = (
        f[:-2, :-2] + f[:-2, 1:-1] + f[:-2, 2:] - f[2:, :-2] - f[2:, 1:-1] - f[2:, 2:]
    ) / 3.0
    mag = (np.abs(gh) + np.abs(gv)) / 2.0
    strong = mag > GRADIENT_THRESHOLD
    if not strong.any():
        return 0.0
    theta = np.mod(np.arctan2(gv[strong], gh[strong]), np.pi)
    bins = np.minimum((theta * DIRECTIONALITY_BINS / np.pi).astype(np.int64), DIRECTIONALITY_BINS - 1)
    p = np.bincount(bins, minlength=DIRECTIONALITY_BINS) / strong.sum()
    centers = (np.arange(DIRECTIONALITY_BINS) + 0.5) * np.pi / DIRECTIONALITY_BINS
    resultant = np.abs((p * np.exp(2j * centers)).sum())
    return float(resultant)


def tamura_features(img: Image) -> tuple[float, float, float]:
    """(coarseness, contrast, directionality) for a 1-channel image of size >= 32x32."""
    if img.channels != 1:
        raise ValueError("tamura_features requires a 1-channel image")
    if img.width < MIN_TAMURA_SIZE or img.height < MIN_TAMURA_SIZE:
        raise UndefinedInputError(
            f"image {img.width}x{img.height} too small for texture windows (need >= 32x32)"
        )
    f = img.pixels.astype(np.float64)
    return _coarseness(f), _tamura_contrast(f), _directionality(f)


def texture_features(
    img: Image,
    levels: int = DEFAULT_GLCM_LEVELS,
    offsets=DEFAULT_GLCM_OFFSETS,
    tamura: bool = True,
) -> TextureFeature:
    """Full texture block: co-occurrence features averaged over offsets + Tamura."""
    acc = np.zeros(5)
    for off in offsets:
        acc += glcm_features(glcm(img, tuple(off), levels))
    acc /= len(offsets)
    if tamura:
        coarse, contrast, direction = tamura_features(img)
    else:
        coarse = contrast = direction = 0.0
    return TextureFeature(
        contrast=acc[0],
        dissimilarity=acc[1],
        homogeneity=acc[2],
        angular_second_moment=acc[3],
        entropy=acc[4],
        tamura_coarseness=coarse,
        tamura_contrast=contrast,
        tamura_directionality=direction,
    )
