"""Deterministic synthetic fixture corpus: three feature-separable classes.

field/   solid blue-band color fields (color block separates them)
checker/ gray checkerboards (texture block separates them)
shape/   dark disks and squares on light ground (shape block separates them)

Jitter within each class is drawn from a seeded generator, so the corpus is
reproducible byte for byte. Also houses the small PNM/PNG writers the fixtures
and tests use.
"""

from __future__ import annotations

import colorsys
from pathlib import Path

import numpy as np
from PIL import Image as PilImage

DEFAULT_SEED = 20240521
DEFAULT_SIZE = 64
DEFAULT_PER_CLASS = 20
CLASS_NAMES = ("checker", "field", "shape")


def write_pgm(path, array: np.ndarray) -> None:
    """Write a 2-d uint8 array as binary PGM (P5)."""
    a = np.asarray(array, dtype=np.uint8)
    if a.ndim != 2:
        raise ValueError("write_pgm expects a 2-d array")
    h, w = a.shape
    Path(path).write_bytes(b"P5\n%d %d\n255\n" % (w, h) + a.tobytes())


def write_ppm(path, array: np.ndarray) -> None:
    """Write an (h, w, 3) uint8 array as binary PPM (P6)."""
    a = np.asarray(array, dtype=np.uint8)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError("write_ppm expects an (h, w, 3) array")
    h, w = a.shape[:2]
    Path(path).write_bytes(b"P6\n%d %d\n255\n" % (w, h) + a.tobytes())


def write_png(path, array: np.ndarray) -> None:
    """Write a 2-d (grayscale) or (h, w, 3) uint8 array as PNG."""
    PilImage.fromarray(np.asarray(array, dtype=np.uint8)).save(path, format="PNG")


def solid_field(size: int, hue: float, sat: float, val: float) -> np.ndarray:
    """Single-color RGB image from HSV coordinates (hue in degrees)."""
    r, g, b = colorsys.hsv_to_rgb(hue / 360.0, sat, val)
    rgb = np.array([round(r * 255), round(g * 255), round(b * 255)], dtype=np.uint8)
    return np.broadcast_to(rgb, (size, size, 3)).copy()


def checkerboard(size: int, cell: int, dark: int, light: int, phase=(0, 0)) -> np.ndarray:
    """Grayscale checkerboard with square cells of the given side."""
    y, x = np.indices((size, size))
    parity = ((y + phase[0]) // cell + (x + phase[1]) // cell) % 2
    return np.where(parity == 0, dark, light).astype(np.uint8)


def disk_image(size: int, radius: float, center, fg: int, bg: int) -> np.ndarray:
    y, x = np.indices((size, size))
    inside = (x - center[0]) ** 2 + (y - center[1]) ** 2 <= radius**2
    return np.where(inside, fg, bg).astype(np.uint8)


def square_image(size: int, half: int, center, fg: int, bg: int) -> np.ndarray:
    y, x = np.indices((size, size))
    inside = (np.abs(x - center[0]) <= half) & (np.abs(y - center[1]) <= half)
    return np.where(inside, fg, bg).astype(np.uint8)


def generate_corpus(
    root,
    seed: int = DEFAULT_SEED,
    per_class: int = DEFAULT_PER_CLASS,
    size: int = DEFAULT_SIZE,
) -> list[Path]:
    """Write the three-class corpus under root and return the file paths.

    Class jitter is confined so classes stay separable: fields keep to one HSV
    histogram cell, checkers vary cell size and contrast, shapes alternate
    between disks and squares with jittered geometry.
    """
    if per_class > 30:
        raise ValueError("per_class above 30 would push shape backgrounds past 255")
    rng = np.random.default_rng(seed)
    root = Path(root)
    paths: list[Path] = []

    field_dir = root / "field"
    checker_dir = root / "checker"
    shape_dir = root / "shape"
    for d in (field_dir, checker_dir, shape_dir):
        d.mkdir(parents=True, exist_ok=True)

    for i in range(per_class):
        hue = rng.uniform(205.0, 220.0)  # stays inside one 45-degree hue bin
        sat = rng.uniform(0.8, 0.98)
        val = rng.uniform(0.7, 0.98)
        p = field_dir / f"field_{i:02d}.ppm"
        write_ppm(p, solid_field(size, hue, sat, val))
        paths.append(p)

    for i in range(per_class):
        cell = int(rng.integers(4, 9))
        dark = 20 + i  # distinct per image so color blocks never collide exactly
        light = int(rng.integers(205, 231))
        phase = (int(rng.integers(0, cell)), int(rng.integers(0, cell)))
        p = checker_dir / f"checker_{i:02d}.pgm"
        write_pgm(p, checkerboard(size, cell, dark, light, phase))
        paths.append(p)

    for i in range(per_class):
        fg = 10 + i  # distinct per image, same reason as the checker darks
        bg = 225 + i
        cx = size // 2 + int(rng.integers(-5, 6))
        cy = size // 2 + int(rng.integers(-5, 6))
        if i % 2 == 0:
            img = disk_image(size, float(rng.uniform(13.0, 19.0)), (cx, cy), fg, bg)
        else:
            img = square_image(size, int(rng.integers(11, 17)), (cx, cy), fg, bg)
        p = shape_dir / f"shape_{i:02d}.png"
        write_png(p, img)
        paths.append(p)

    return paths


def class_of(image_id: str) -> str:
    """Class label an image id belongs to (its top-level directory)."""
    return image_id.split("/", 1)[0]
