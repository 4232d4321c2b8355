"""HTTP facade over the index: query by example, feedback sessions, thumbnails.

The service is a thin adapter: every ranking payload is exactly the in-process
query result, serialized. State is the immutable loaded index plus an
in-memory session table with a TTL.

Error payloads are {"detail": {"code", "message"}} with codes: no_index,
unknown_metric, malformed_image, bad_query, unknown_image, unknown_session,
bad_labels, all_neutral, no_image_root, unauthorized.
"""

from __future__ import annotations

import io
import math
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, File, Form, HTTPException, Query, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from PIL import Image as PilImage

from .errors import AllNeutralError, CbirError, UnknownMetricError
from .feedback import (
    LABELS,
    FeedbackSession,
    apply_feedback,
    session_query,
    start_session,
)
from .image import SUPPORTED_EXTENSIONS, load_image
from .index import IndexStore, RankedResults, extract_signature
from .metrics import parse_metric

DEFAULT_SESSION_TTL = 30 * 60.0
THUMBNAIL_MAX_DIM = 128
_MEDIA_TYPES = {
    ".png": "image/png",
    ".bmp": "image/bmp",
    ".pgm": "image/x-portable-graymap",
    ".ppm": "image/x-portable-pixmap",
    ".pnm": "image/x-portable-anymap",
}


def _error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail={"code": code, "message": message})


@dataclass
class _SessionRecord:
    session: FeedbackSession
    k: int
    metric: str
    last_access: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class _SessionTable:
    """TTL-bounded map of live feedback sessions; expired entries vanish lazily."""

    def __init__(self, ttl: float):
        self.ttl = ttl
        self._entries: dict[str, _SessionRecord] = {}
        self._guard = threading.Lock()

    def put(self, record: _SessionRecord) -> None:
        with self._guard:
            self._purge()
            self._entries[record.session.session_id] = record

    def get(self, session_id: str) -> _SessionRecord | None:
        with self._guard:
            self._purge()
            record = self._entries.get(session_id)
            if record is not None:
                record.last_access = time.monotonic()
            return record

    def _purge(self) -> None:
        now = time.monotonic()
        dead = [sid for sid, r in self._entries.items() if now - r.last_access > self.ttl]
        for sid in dead:
            del self._entries[sid]


def _json_score(value: float) -> float | None:
    return float(value) if math.isfinite(value) else None


def _results_payload(session: FeedbackSession, ranked: RankedResults, k: int) -> dict:
    return {
        "session_id": session.session_id,
        "round": session.round_number,
        "metric": ranked.metric,
        "k": k,
        "higher_is_better": ranked.higher_is_better,
        "results": [
            {
                "image_id": r.image_id,
                "score": _json_score(r.score),
                "thumbnail_url": f"/api/images/{r.image_id}?thumb=1",
            }
            for r in ranked.results
        ],
    }


def create_app(
    store: IndexStore | None = None,
    image_root=None,
    auth_token: str | None = None,
    session_ttl: float = DEFAULT_SESSION_TTL,
) -> FastAPI:
    """Build the service; store may be None (every query answers 503)."""
    app = FastAPI(title="image retrieval service", openapi_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    root = Path(image_root) if image_root is not None else None
    sessions = _SessionTable(session_ttl)

    def require_auth(request: Request) -> None:
        if auth_token is None:
            return
        supplied = request.headers.get("authorization", "")
        if supplied != f"Bearer {auth_token}":
            raise _error(401, "unauthorized", "missing or wrong bearer token")

    def require_store() -> IndexStore:
        if store is None:
            raise _error(503, "no_index", "no index is loaded")
        return store

    @app.exception_handler(CbirError)
    def _domain_error(request: Request, exc: CbirError):
        return JSONResponse(
            status_code=400,
            content={"detail": {"code": "bad_query", "message": str(exc)}},
        )

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "index_loaded": store is not None,
            "images": len(store) if store is not None else 0,
        }

    @app.post("/api/query", dependencies=[Depends(require_auth)])
    def handle_query(
        k: int = Query(10, ge=1),
        metric: str = Query("l2"),
        image: UploadFile | None = File(None),
        image_id: str | None = Form(None),
    ) -> dict:
        idx = require_store()
        try:
            spec = parse_metric(metric)
        except UnknownMetricError as exc:
            raise _error(400, "unknown_metric", str(exc)) from exc

        if image is not None:
            suffix = Path(image.filename or "").suffix.lower()
            if suffix not in SUPPORTED_EXTENSIONS:
                raise _error(400, "malformed_image", f"unsupported upload type {suffix!r}")
            payload = image.file.read()
            try:
                with tempfile.NamedTemporaryFile(suffix=suffix) as tmp:
                    tmp.write(payload)
                    tmp.flush()
                    img = load_image(tmp.name)
                sig = extract_signature(img, idx.config)
            except CbirError as exc:
                raise _error(400, "malformed_image", str(exc)) from exc
        elif image_id is not None:
            sig = idx.signatures.get(image_id)
            if sig is None:
                raise _error(404, "unknown_image", f"image id {image_id!r} is not indexed")
        else:
            raise _error(400, "malformed_image", "provide an image upload or an image_id")

        session = start_session(sig, idx)
        ranked = session_query(session, idx, k, spec)
        sessions.put(
            _SessionRecord(
                session=session, k=k, metric=str(spec), last_access=time.monotonic()
            )
        )
        return _results_payload(session, ranked, k)

    @app.post("/api/sessions/{session_id}/feedback", dependencies=[Depends(require_auth)])
    def handle_feedback(session_id: str, labels: dict[str, str]) -> dict:
        idx = require_store()
        record = sessions.get(session_id)
        if record is None:
            raise _error(404, "unknown_session", f"no live session {session_id!r}")
        bad_values = sorted(set(labels.values()) - set(LABELS))
        if bad_values:
            raise _error(400, "bad_labels", f"unknown labels: {', '.join(bad_values)}")
        unknown = sorted(i for i in labels if i not in idx.signatures)
        if unknown:
            raise _error(400, "bad_labels", f"ids not in index: {', '.join(unknown)}")
        relevant = [idx.signatures[i].norm_fv for i, l in labels.items() if l == "relevant"]
        negative = [idx.signatures[i].norm_fv for i, l in labels.items() if l == "not_relevant"]
        with record.lock:
            try:
                apply_feedback(record.session, labels, relevant, negative)
            except AllNeutralError as exc:
                raise _error(422, "all_neutral", str(exc)) from exc
            ranked = session_query(record.session, idx, record.k, record.metric)
            return _results_payload(record.session, ranked, record.k)

    @app.get("/api/images/{image_id:path}", dependencies=[Depends(require_auth)])
    def handle_image(image_id: str, thumb: int = Query(0)) -> Response:
        idx = require_store()
        if image_id not in idx.signatures:
            raise _error(404, "unknown_image", f"image id {image_id!r} is not indexed")
        if root is None:
            raise _error(404, "no_image_root", "server started without an image directory")
        path = (root / image_id).resolve()
        if not path.is_file() or root.resolve() not in path.parents:
            raise _error(404, "unknown_image", f"no file for image id {image_id!r}")
        if not thumb:
            media = _MEDIA_TYPES.get(path.suffix.lower(), "application/octet-stream")
            return Response(content=path.read_bytes(), media_type=media)
        img = load_image(path)
        pil = PilImage.fromarray(img.pixels)
        pil.thumbnail((THUMBNAIL_MAX_DIM, THUMBNAIL_MAX_DIM))
        buf = io.BytesIO()
        pil.save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    return app
