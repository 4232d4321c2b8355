"""Content-based image retrieval: feature extraction, indexing, ranked search,
evaluation and relevance feedback."""

from .errors import CbirError
from .image import Image, load_image
from .index import (
    ExtractionConfig,
    IndexStore,
    RankedResults,
    Signature,
    build_index,
    extract_signature,
    load_index,
    query,
    save_index,
)

__version__ = "0.1.0"

__all__ = [
    "CbirError",
    "ExtractionConfig",
    "Image",
    "IndexStore",
    "RankedResults",
    "Signature",
    "build_index",
    "extract_signature",
    "load_image",
    "load_index",
    "query",
    "save_index",
    "__version__",
]
