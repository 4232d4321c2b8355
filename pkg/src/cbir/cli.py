"""Command-line entry point: index, query, evaluate, serve, inspect.

Exit codes: 0 success, 1 usage error, 2 I/O error (missing or unreadable
files), 3 domain error (bad metric, empty store, degenerate input, ...).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import (
    CbirError,
    CorruptDataError,
    IndexFormatError,
    UnsupportedFormatError,
)
from .evaluation import evaluate_corpus, load_ground_truth
from .image import cdf, histogram, load_image, to_grayscale
from .index import ExtractionConfig, build_index, extract_signature, load_index, query, save_index

_IO_ERRORS = (FileNotFoundError, IsADirectoryError, PermissionError, OSError,
              CorruptDataError, IndexFormatError, UnsupportedFormatError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2; usage errors are exit 1 here
        raise UsageError(message)


def _load_config(path: str | None) -> ExtractionConfig:
    if path is None:
        return ExtractionConfig()
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such config file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptDataError(f"{p}: not valid JSON: {exc}") from exc
    return ExtractionConfig.from_dict(doc)


def _cmd_index(args) -> int:
    cfg = _load_config(args.config)
    result = build_index(args.dir, cfg)
    save_index(result.store, args.out)
    for failure in result.failures:
        print(f"skipped {failure.path}: {failure.message}", file=sys.stderr)
    print(f"indexed {len(result.store)} images -> {args.out}")
    return 0


def _cmd_query(args) -> int:
    store = load_index(args.index)
    img = load_image(args.image)
    ranked = query(store, img, args.k, args.metric, threshold=args.threshold)
    for rank, r in enumerate(ranked.results, start=1):
        print(f"{rank}  {r.score:.6f}  {r.image_id}")
    return 0


def _cmd_evaluate(args) -> int:
    store = load_index(args.index)
    truth = load_ground_truth(args.truth, store)
    report = evaluate_corpus(store, truth, args.k, args.metric)
    print(report.table())
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        print(f"report written -> {args.report}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    store = load_index(args.index)
    token = args.token or os.environ.get("CBIR_TOKEN") or None
    app = create_app(store=store, image_root=args.images, auth_token=token)
    host, _, port = args.listen.rpartition(":")
    if not host or not port.isdigit():
        raise UsageError(f"--listen expects host:port, got {args.listen!r}")
    uvicorn.run(app, host=host, port=int(port))
    return 0


def _cmd_inspect(args) -> int:
    cfg = _load_config(args.config)
    img = load_image(args.image)
    sig = extract_signature(img, cfg)
    layout = cfg.layout
    print(f"image: {args.image}  {img.width}x{img.height}  channels: {img.channels}")
    print(f"config: {cfg.config_hash}")
    print(f"shape_absent: {str(sig.shape_absent).lower()}")
    blocks = (
        ("color_hist", layout.color_hist),
        ("color_moments", layout.color_moments),
        ("texture", layout.texture),
        ("shape", layout.shape),
    )
    for name, span in blocks:
        values = sig.raw_fv[span]
        print(f"{name}: {len(values)} dims")
        for i, v in enumerate(values):
            if name == "color_hist" and v == 0:
                continue
            print(f"  {name}[{i}] = {v:.6g}")
    gray = to_grayscale(img)
    h = histogram(gray)
    print("gray histogram (nonzero bins):")
    for i, count in enumerate(h.bins):
        if count:
            print(f"  hist[{i}] = {count}")
    curve = cdf(h)
    print("gray cdf (every 16th bin):")
    for i in list(range(0, 256, 16)) + [255]:
        print(f"  cdf[{i}] = {curve.values[i]:.6f}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="cbir", description="content-based image retrieval engine")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("index", help="extract signatures for a directory of images")
    p.add_argument("--dir", required=True, help="directory of images to index")
    p.add_argument("--out", required=True, help="index file to write")
    p.add_argument("--config", help="JSON extraction config")
    p.set_defaults(func=_cmd_index)

    p = sub.add_parser("query", help="rank indexed images against a query image")
    p.add_argument("--index", required=True)
    p.add_argument("--image", required=True, help="query image file")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--metric", default="l2")
    p.add_argument("--threshold", type=float, default=None,
                   help="drop results scoring worse than this value")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("evaluate", help="precision/recall against a ground-truth file")
    p.add_argument("--index", required=True)
    p.add_argument("--truth", required=True, help="JSON {query_id: [relevant ids]}")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--metric", default="l2")
    p.add_argument("--report", help="also write the JSON report here")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--index", required=True)
    p.add_argument("--listen", default="127.0.0.1:8021", help="host:port")
    p.add_argument("--images", help="directory the image ids refer to")
    p.add_argument("--token", help="bearer token (or env CBIR_TOKEN)")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("inspect", help="print one image's signature, histogram and cdf")
    p.add_argument("--image", required=True)
    p.add_argument("--config", help="JSON extraction config")
    p.set_defaults(func=_cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError("missing command (index, query, evaluate, serve, inspect)")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except _IO_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CbirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
