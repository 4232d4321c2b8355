"""Signature assembly, corpus-wide normalization, persistence and top-k queries.

A signature concatenates the color, texture and shape blocks into one feature
vector. The index stores raw vectors plus a per-dimension min/max so vectors
can be compared on a common [0, 1] scale; queries are an exhaustive scan with
deterministic tie-breaking by image id.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import color, shape, texture
from .errors import (
    ConfigMismatchError,
    EmptyStoreError,
    IndexFormatError,
    IndexVersionError,
    NoShapeError,
    UndefinedInputError,
)
from .image import SUPPORTED_EXTENSIONS, Image, load_image, to_grayscale
from .metrics import BlockSlices, MetricSpec, minkowski, osm, parse_metric

INDEX_VERSION = 1


@dataclass(frozen=True)
class FeatureLayout:
    """Dimension spans of every block inside the assembled feature vector."""

    color_hist: slice
    color_moments: slice
    texture: slice
    shape: slice

    @property
    def color(self) -> slice:
        return slice(self.color_hist.start, self.color_moments.stop)

    @property
    def length(self) -> int:
        return self.shape.stop

    def block_slices(self) -> BlockSlices:
        return BlockSlices(color=self.color, texture=self.texture, shape=self.shape)


@dataclass(frozen=True)
class ExtractionConfig:
    """Everything that determines the feature vector, hashed for compatibility checks."""

    hsv_grid: tuple[int, int, int] = color.DEFAULT_HSV_GRID
    glcm_levels: int = texture.DEFAULT_GLCM_LEVELS
    glcm_offsets: tuple[tuple[int, int], ...] = texture.DEFAULT_GLCM_OFFSETS
    tamura: bool = True
    fourier_harmonics: int = shape.DEFAULT_FOURIER_HARMONICS

    def __post_init__(self) -> None:
        object.__setattr__(self, "hsv_grid", tuple(int(n) for n in self.hsv_grid))
        object.__setattr__(
            self, "glcm_offsets", tuple((int(dx), int(dy)) for dx, dy in self.glcm_offsets)
        )

    @property
    def layout(self) -> FeatureLayout:
        nh = self.hsv_grid[0] * self.hsv_grid[1] * self.hsv_grid[2]
        n_texture = 5 + (3 if self.tamura else 0)
        a = nh
        b = a + 9
        c = b + n_texture
        d = c + 7 + self.fourier_harmonics
        return FeatureLayout(
            color_hist=slice(0, a),
            color_moments=slice(a, b),
            texture=slice(b, c),
            shape=slice(c, d),
        )

    def to_dict(self) -> dict:
        return {
            "hsv_grid": list(self.hsv_grid),
            "glcm_levels": self.glcm_levels,
            "glcm_offsets": [list(o) for o in self.glcm_offsets],
            "tamura": self.tamura,
            "fourier_harmonics": self.fourier_harmonics,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionConfig":
        try:
            return cls(
                hsv_grid=tuple(d["hsv_grid"]),
                glcm_levels=int(d["glcm_levels"]),
                glcm_offsets=tuple(tuple(o) for o in d["glcm_offsets"]),
                tamura=bool(d["tamura"]),
                fourier_harmonics=int(d["fourier_harmonics"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise IndexFormatError(f"bad extraction config: {exc}") from exc

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("ascii")).hexdigest()


@dataclass(frozen=True)
class Signature:
    """One image's feature vector, raw and (once indexed) normalized."""

    image_id: str
    raw_fv: np.ndarray
    config_hash: str
    shape_absent: bool
    norm_fv: np.ndarray | None = None


@dataclass(frozen=True)
class IndexStore:
    """Immutable feature database: signatures plus the normalization that built them."""

    config: ExtractionConfig
    signatures: dict[str, Signature]
    norm_min: np.ndarray
    norm_max: np.ndarray
    version: int = INDEX_VERSION

    @property
    def config_hash(self) -> str:
        return self.config.config_hash

    def __len__(self) -> int:
        return len(self.signatures)

    def normalize(self, raw_fv: np.ndarray) -> np.ndarray:
        """Map a raw vector onto the store's per-dimension [0, 1] scale.

        Dimensions that were constant across the corpus map to 0.
        """
        span = self.norm_max - self.norm_min
        return np.where(span > 0, (raw_fv - self.norm_min) / np.where(span > 0, span, 1.0), 0.0)


@dataclass(frozen=True)
class RankedResult:
    image_id: str
    score: float


@dataclass(frozen=True)
class RankedResults:
    """Query outcome: best-first results with the metric that ordered them."""

    results: tuple[RankedResult, ...]
    metric: str
    higher_is_better: bool

    def __len__(self) -> int:
        return len(self.results)

    def ids(self) -> list[str]:
        return [r.image_id for r in self.results]


@dataclass(frozen=True)
class BuildFailure:
    path: str
    message: str


@dataclass(frozen=True)
class BuildResult:
    store: IndexStore
    failures: tuple[BuildFailure, ...]


def _ensure_rgb(img: Image) -> Image:
    if img.channels == 3:
        return img
    return Image(np.repeat(img.pixels[:, :, None], 3, axis=2))


def extract_signature(img: Image, cfg: ExtractionConfig, image_id: str = "query") -> Signature:
    """Assemble color || texture || shape into one raw feature vector.

    Images without a segmentable object get an all-zero shape block and the
    shape_absent flag instead of an error.
    """
    rgb = _ensure_rgb(img)
    gray = to_grayscale(img)

    hist = color.hsv_histogram(rgb, cfg.hsv_grid).bins
    moments = color.color_moments(rgb).as_vector()
    tex = texture.texture_features(
        gray, levels=cfg.glcm_levels, offsets=cfg.glcm_offsets, tamura=cfg.tamura
    ).as_vector()
    if not cfg.tamura:
        tex = tex[:5]

    shape_absent = False
    try:
        feat = shape.shape_features(gray, k=cfg.fourier_harmonics)
        shape_vec = feat.as_vector()
    except NoShapeError:
        shape_absent = True
        shape_vec = np.zeros(7 + cfg.fourier_harmonics)

    fv = np.concatenate([hist, moments, tex, shape_vec])
    if not np.isfinite(fv).all():
        raise UndefinedInputError("feature vector contains non-finite entries")
    return Signature(
        image_id=image_id,
        raw_fv=fv,
        config_hash=cfg.config_hash,
        shape_absent=shape_absent,
    )


def _iter_image_files(root: Path) -> list[Path]:
    files = [
        p
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in SUPPORTED_EXTENSIONS
    ]
    return sorted(files, key=lambda p: p.relative_to(root).as_posix())


def build_index(image_dir, cfg: ExtractionConfig | None = None) -> BuildResult:
    """Extract signatures for every supported image under a directory.

    Files that fail to load or extract are collected as failures, not fatal.
    The store normalizes every dimension to [0, 1] by corpus min/max.
    """
    cfg = cfg or ExtractionConfig()
    root = Path(image_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"no such directory: {root}")
    signatures: list[Signature] = []
    failures: list[BuildFailure] = []
    for path in _iter_image_files(root):
        image_id = path.relative_to(root).as_posix()
        try:
            img = load_image(path)
            signatures.append(extract_signature(img, cfg, image_id=image_id))
        except Exception as exc:  # per-file failures are reported, not raised
            failures.append(BuildFailure(path=str(path), message=str(exc)))
    if not signatures:
        raise EmptyStoreError(f"no loadable images under {root}")

    matrix = np.stack([s.raw_fv for s in signatures])
    norm_min = matrix.min(axis=0)
    norm_max = matrix.max(axis=0)
    span = norm_max - norm_min
    normalized = np.where(span > 0, (matrix - norm_min) / np.where(span > 0, span, 1.0), 0.0)
    store = IndexStore(
        config=cfg,
        signatures={
            s.image_id: replace(s, norm_fv=normalized[i]) for i, s in enumerate(signatures)
        },
        norm_min=norm_min,
        norm_max=norm_max,
    )
    return BuildResult(store=store, failures=tuple(failures))


def score_pair(metric: MetricSpec, q: np.ndarray, s: np.ndarray, layout: FeatureLayout) -> float:
    """Score two normalized feature vectors under one metric.

    l1/l2/minkowski/spd/cosine use the full vector; histogram and intersection
    use the color block; osm averages per-block partial similarities.
    """
    if metric.name == "l1":
        return minkowski(q, s, 1)
    if metric.name == "l2":
        return minkowski(q, s, 2)
    if metric.name == "minkowski":
        return minkowski(q, s, metric.p)
    if metric.name == "histogram":
        return minkowski(q[layout.color], s[layout.color], 2)
    if metric.name == "intersection":
        a = q[layout.color]
        b = s[layout.color]
        ta = float(a.sum())
        tb = float(b.sum())
        if ta <= 0 or tb <= 0:
            raise UndefinedInputError("color block sums to 0; intersection undefined")
        # dividing by the larger sum keeps the score in [0, 1], symmetric, and
        # exactly 1 for identical blocks
        return float(np.minimum(a, b).sum()) / max(ta, tb)
    if metric.name == "osm":
        return osm(q, s, layout.block_slices()).osm
    if metric.name == "spd":
        d = q - s
        mean = float(d.mean())
        sd = float(d.std(ddof=1))
        if sd == 0:
            return 0.0 if mean == 0 else float("inf")
        return float(np.sqrt(d.size) * abs(mean) / sd)
    if metric.name == "cosine":
        qq = float(q @ q)
        ss = float(s @ s)
        if qq == 0 or ss == 0:
            raise UndefinedInputError("zero feature vector; cosine disparity undefined")
        dot = float(q @ s)
        # squared form so identical vectors cancel exactly and self scores 0
        cos = math.copysign(math.sqrt(dot * dot / (qq * ss)), dot)
        return 1.0 - cos
    raise AssertionError(f"unhandled metric {metric.name}")


def _as_metric(metric: str | MetricSpec) -> MetricSpec:
    return metric if isinstance(metric, MetricSpec) else parse_metric(metric)


def query_normalized(
    store: IndexStore,
    norm_fv: np.ndarray,
    k: int,
    metric: str | MetricSpec = "l2",
    threshold: float | None = None,
) -> RankedResults:
    """Rank every indexed signature against an already-normalized query vector.

    Results ascend for distances and descend for similarities; equal scores are
    broken by ascending image id. threshold (optional) keeps only scores at or
    better than the given value.
    """
    spec = _as_metric(metric)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(store) == 0:
        raise EmptyStoreError("cannot query an empty index")
    norm_fv = np.asarray(norm_fv, dtype=np.float64)
    if norm_fv.shape != (store.config.layout.length,):
        raise ConfigMismatchError(
            f"query vector has length {norm_fv.shape}, index expects {store.config.layout.length}"
        )
    layout = store.config.layout
    scored = []
    for image_id, sig in store.signatures.items():
        value = score_pair(spec, norm_fv, sig.norm_fv, layout)
        if threshold is not None:
            if spec.higher_is_better and value < threshold:
                continue
            if not spec.higher_is_better and value > threshold:
                continue
        scored.append(RankedResult(image_id=image_id, score=value))
    reverse = spec.higher_is_better
    scored.sort(key=lambda r: ((-r.score if reverse else r.score), r.image_id))
    return RankedResults(
        results=tuple(scored[:k]),
        metric=str(spec),
        higher_is_better=spec.higher_is_better,
    )


def query(
    store: IndexStore,
    q: Image | Signature,
    k: int,
    metric: str | MetricSpec = "l2",
    threshold: float | None = None,
) -> RankedResults:
    """Rank the index against a query image (extracted on the fly) or signature."""
    if isinstance(q, Image):
        sig = extract_signature(q, store.config)
    elif isinstance(q, Signature):
        if q.config_hash != store.config_hash:
            raise ConfigMismatchError(
                "query signature was extracted with a different configuration"
            )
        sig = q
    else:
        raise TypeError(f"query expects an Image or Signature, got {type(q).__name__}")
    return query_normalized(store, store.normalize(sig.raw_fv), k, metric, threshold)


def _floats(values) -> list[float]:
    return [float(v) for v in values]


def save_index(store: IndexStore, path) -> None:
    """Write the store as versioned JSON; floats keep full round-trip precision."""
    doc = {
        "version": store.version,
        "config": store.config.to_dict(),
        "config_hash": store.config_hash,
        "normalization": {
            "min": _floats(store.norm_min),
            "max": _floats(store.norm_max),
        },
        "signatures": [
            {
                "id": s.image_id,
                "raw_fv": _floats(s.raw_fv),
                "norm_fv": _floats(s.norm_fv),
                "flags": {"shape_absent": s.shape_absent},
            }
            for s in store.signatures.values()
        ],
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_index(path) -> IndexStore:
    """Read an index written by save_index, validating version and layout."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such index file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IndexFormatError(f"{p}: not a readable index file: {exc}") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise IndexFormatError(f"{p}: missing version field")
    if doc["version"] != INDEX_VERSION:
        raise IndexVersionError(
            f"{p}: index version {doc['version']} not supported (expected {INDEX_VERSION})"
        )
    try:
        cfg = ExtractionConfig.from_dict(doc["config"])
        stated_hash = doc["config_hash"]
        norm_min = np.array(doc["normalization"]["min"], dtype=np.float64)
        norm_max = np.array(doc["normalization"]["max"], dtype=np.float64)
        records = doc["signatures"]
    except (KeyError, TypeError) as exc:
        raise IndexFormatError(f"{p}: malformed index document: {exc}") from exc
    if stated_hash != cfg.config_hash:
        raise IndexFormatError(f"{p}: config hash does not match the stored config")
    length = cfg.layout.length
    if norm_min.shape != (length,) or norm_max.shape != (length,):
        raise IndexFormatError(f"{p}: normalization arrays do not match the layout")
    signatures: dict[str, Signature] = {}
    try:
        for rec in records:
            raw = np.array(rec["raw_fv"], dtype=np.float64)
            norm = np.array(rec["norm_fv"], dtype=np.float64)
            if raw.shape != (length,) or norm.shape != (length,):
                raise IndexFormatError(f"{p}: signature {rec['id']!r} has a bad vector length")
            signatures[rec["id"]] = Signature(
                image_id=rec["id"],
                raw_fv=raw,
                config_hash=cfg.config_hash,
                shape_absent=bool(rec["flags"]["shape_absent"]),
                norm_fv=norm,
            )
    except (KeyError, TypeError) as exc:
        raise IndexFormatError(f"{p}: malformed signature record: {exc}") from exc
    if not signatures:
        raise EmptyStoreError(f"{p}: index contains no signatures")
    return IndexStore(config=cfg, signatures=signatures, norm_min=norm_min, norm_max=norm_max)
