"""Image loading, color-space conversion, histograms and CDF curves.

Images are 8-bit, 1-channel (gray) or 3-channel (RGB), stored row-major as a
numpy uint8 array of shape (height, width) or (height, width, 3).
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptDataError, DimensionMismatchError, UndefinedInputError, UnsupportedFormatError

GRAY_WEIGHTS = (0.299, 0.587, 0.114)  # BT.601 luma


@dataclass(frozen=True)
class Image:
    """An 8-bit raster image; pixels has shape (h, w) or (h, w, 3), dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if not isinstance(px, np.ndarray) or px.dtype != np.uint8:
            raise ValueError("pixels must be a uint8 numpy array")
        if px.ndim == 3 and px.shape[2] == 1:
            px = px[:, :, 0]
            object.__setattr__(self, "pixels", px)
        if px.ndim not in (2, 3) or (px.ndim == 3 and px.shape[2] != 3):
            raise ValueError(f"expected (h, w) or (h, w, 3) pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must have at least one pixel")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3

    @classmethod
    def from_array(cls, arr, channels: int | None = None) -> "Image":
        """Build an Image from any integer array in [0, 255]."""
        a = np.asarray(arr)
        if a.min(initial=0) < 0 or a.max(initial=0) > 255:
            raise ValueError("pixel values must lie in [0, 255]")
        img = cls(a.astype(np.uint8))
        if channels is not None and img.channels != channels:
            raise DimensionMismatchError(f"expected {channels}-channel image, got {img.channels}")
        return img


@dataclass(frozen=True)
class Histogram:
    """Per-bin pixel counts for one channel."""

    bins: np.ndarray  # int64 counts

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    def __len__(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class CdfCurve:
    """Cumulative distribution of a histogram: nondecreasing fractions ending at 1."""

    values: np.ndarray  # float64 in [0, 1]


_PNM_EXTENSIONS = {".pgm", ".ppm", ".pnm"}
_SUPPORTED_EXTENSIONS = _PNM_EXTENSIONS | {".png", ".bmp"}
SUPPORTED_EXTENSIONS = tuple(sorted(_SUPPORTED_EXTENSIONS))


def load_image(path) -> Image:
    """Load a PGM/PPM (P2, P3, P5, P6), PNG or BMP file.

    Sources deeper than 8 bits are rescaled to [0, 255] by integer division
    (v * 255 // maxval). Raises FileNotFoundError, UnsupportedFormatError or
    CorruptDataError.
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such image file: {p}")
    ext = p.suffix.lower()
    if ext not in _SUPPORTED_EXTENSIONS:
        raise UnsupportedFormatError(f"unsupported image format: {ext or '(no extension)'}")
    data = p.read_bytes()
    if ext in _PNM_EXTENSIONS:
        return _decode_pnm(data, p)
    return _decode_with_pillow(data, p)


def _decode_pnm(data: bytes, path: Path) -> Image:
    m = re.match(rb"P([2356])\s", data)
    if not m:
        raise CorruptDataError(f"{path}: not a P2/P3/P5/P6 netpbm file")
    kind = int(m.group(1))
    ascii_raster = kind in (2, 3)
    color = kind in (3, 6)

    # Header tokens may be separated by whitespace and '#' comments.
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            pos = len(data) if eol == -1 else eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise CorruptDataError(f"{path}: truncated netpbm header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise CorruptDataError(f"{path}: non-numeric netpbm header") from None
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise CorruptDataError(f"{path}: invalid netpbm dimensions {width}x{height} maxval {maxval}")

    nsamples = width * height * (3 if color else 1)
    if ascii_raster:
        try:
            values = np.array(data[pos:].split(), dtype=np.int64)
        except ValueError:
            raise CorruptDataError(f"{path}: non-numeric sample in ASCII raster") from None
    else:
        pos += 1  # single whitespace byte after maxval
        raster = data[pos:]
        if maxval < 256:
            values = np.frombuffer(raster[:nsamples], dtype=np.uint8).astype(np.int64)
        else:
            values = np.frombuffer(raster[: 2 * nsamples], dtype=">u2").astype(np.int64)
    if len(values) < nsamples:
        raise CorruptDataError(f"{path}: raster has {len(values)} samples, expected {nsamples}")
    values = values[:nsamples]
    if values.min() < 0 or values.max() > maxval:
        raise CorruptDataError(f"{path}: sample outside [0, {maxval}]")
    if maxval > 255:
        values = values * 255 // maxval
    shape = (height, width, 3) if color else (height, width)
    return Image(values.reshape(shape).astype(np.uint8))


def _decode_with_pillow(data: bytes, path: Path) -> Image:
    from PIL import Image as PilImage, UnidentifiedImageError

    try:
        with PilImage.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(im, dtype=np.int64)
                arr = np.clip(arr, 0, 65535) * 255 // 65535
                return Image(arr.astype(np.uint8))
            if mode == "1":
                im = im.convert("L")
            elif mode in ("LA", "La"):
                im = im.convert("L")
            elif mode not in ("L", "RGB"):
                im = im.convert("RGB")
            return Image(np.asarray(im, dtype=np.uint8))
    except UnidentifiedImageError:
        raise CorruptDataError(f"{path}: cannot decode file content") from None
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptDataError(f"{path}: {exc}") from None


def to_grayscale(img: Image) -> Image:
    """BT.601 luma: gray = round(0.299 R + 0.587 G + 0.114 B).

    1-channel input is returned unchanged.
    """
    if img.channels == 1:
        return img
    rgb = img.pixels.astype(np.float64)
    wr, wg, wb = GRAY_WEIGHTS
    gray = wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2]
    return Image(np.floor(gray + 0.5).astype(np.uint8))


def rgb_to_hsv(img: Image) -> np.ndarray:
    """Hexcone conversion; returns float array (h, w, 3) with H in [0, 360), S, V in [0, 1].

    Achromatic pixels get H = 0.
    """
    if img.channels != 3:
        raise DimensionMismatchError("rgb_to_hsv requires a 3-channel image")
    rgb = img.pixels.astype(np.float64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    mx = rgb.max(axis=2)
    mn = rgb.min(axis=2)
    delta = mx - mn

    v = mx / 255.0
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(mx > 0, delta / np.where(mx > 0, mx, 1.0), 0.0)
        h = np.zeros_like(mx)
        d = np.where(delta > 0, delta, 1.0)
        h = np.where(mx == r, ((g - b) / d) % 6.0, h)
        h = np.where((mx == g) & (mx != r), (b - r) / d + 2.0, h)
        h = np.where((mx == b) & (mx != r) & (mx != g), (r - g) / d + 4.0, h)
    h = np.where(delta > 0, h * 60.0, 0.0) % 360.0
    return np.stack([h, s, v], axis=2)


def opponent_transform(img: Image) -> np.ndarray:
    """Opponent color axes (R-G, 2B-R-G, R+G+B) as a signed int array (h, w, 3)."""
    if img.channels != 3:
        raise DimensionMismatchError("opponent_transform requires a 3-channel image")
    rgb = img.pixels.astype(np.int64)
    r, g, b = rgb[:, :, 0], rgb[:, :, 1], rgb[:, :, 2]
    return np.stack([r - g, 2 * b - r - g, r + g + b], axis=2)


def histogram(img: Image, bins: int = 256) -> Histogram:
    """Count pixels per quantized level; bin index = floor(value * bins / 256)."""
    if img.channels != 1:
        raise DimensionMismatchError("histogram requires a 1-channel image")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    levels = img.pixels.astype(np.int64).ravel() * bins // 256
    return Histogram(np.bincount(levels, minlength=bins).astype(np.int64))


def cdf(h: Histogram) -> CdfCurve:
    """Running fraction of pixels at or below each bin."""
    total = h.total
    if total == 0:
        raise UndefinedInputError("cdf of an empty histogram is undefined")
    return CdfCurve(np.cumsum(h.bins) / float(total))
