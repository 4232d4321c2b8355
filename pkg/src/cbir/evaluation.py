"""Retrieval quality measures: precision, recall, PR curves, corpus reports.

Precision = NIR / TID (relevant retrieved over total retrieved) and recall =
NIR / NID (relevant retrieved over relevant existing); both are typed errors
rather than silent zeros when their denominators vanish.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import CorruptDataError, EmptyRetrievalError, NoRelevantSetError
from .index import IndexStore, RankedResults, query_normalized


@dataclass(frozen=True)
class EvalCounts:
    """NIR (retrieved and relevant), TID (total retrieved), NID (total relevant)."""

    nir: int
    tid: int
    nid: int

    def __post_init__(self) -> None:
        if self.nir < 0 or self.tid < 0 or self.nid < 0:
            raise ValueError("counts must be nonnegative")
        if self.nir > min(self.tid, self.nid):
            raise ValueError(f"nir={self.nir} exceeds min(tid={self.tid}, nid={self.nid})")


def precision(c: EvalCounts) -> float:
    """Fraction of retrieved images that are relevant."""
    if c.tid == 0:
        raise EmptyRetrievalError("precision undefined: nothing was retrieved")
    return c.nir / c.tid


def recall(c: EvalCounts) -> float:
    """Fraction of the relevant images that were retrieved."""
    if c.nid == 0:
        raise NoRelevantSetError("recall undefined: the relevant set is empty")
    return c.nir / c.nid


def pr_curve(ranked: RankedResults, relevant: set) -> list[tuple[float, float]]:
    """(recall, precision) at every cutoff 1..len(ranked)."""
    if len(ranked) == 0:
        raise EmptyRetrievalError("cannot build a curve from an empty ranking")
    if not relevant:
        raise NoRelevantSetError("cannot build a curve against an empty relevant set")
    nid = len(relevant)
    points = []
    nir = 0
    for cutoff, result in enumerate(ranked.results, start=1):
        if result.image_id in relevant:
            nir += 1
        c = EvalCounts(nir=nir, tid=cutoff, nid=nid)
        points.append((recall(c), precision(c)))
    return points


@dataclass(frozen=True)
class GroundTruth:
    """query_id -> relevant image ids; every id is checked against the index."""

    queries: dict[str, frozenset]


def load_ground_truth(path, store: IndexStore) -> GroundTruth:
    """Read {query_id: [relevant ids...]} JSON and validate ids against the store."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such ground-truth file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptDataError(f"{p}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not doc:
        raise CorruptDataError(f"{p}: expected a non-empty object of query ids")
    queries = {}
    for qid, ids in doc.items():
        if not isinstance(ids, list) or not all(isinstance(i, str) for i in ids):
            raise CorruptDataError(f"{p}: relevant set of {qid!r} must be a list of ids")
        missing = [i for i in [qid, *ids] if i not in store.signatures]
        if missing:
            raise CorruptDataError(
                f"{p}: ids not present in the index: {', '.join(sorted(missing))}"
            )
        queries[qid] = frozenset(ids)
    return GroundTruth(queries=queries)


@dataclass(frozen=True)
class QueryReport:
    query_id: str
    retrieved: tuple[str, ...]
    precision_at_k: float
    recall_at_k: float
    curve: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class EvalReport:
    metric: str
    k: int
    queries: tuple[QueryReport, ...]
    mean_precision: float
    mean_recall: float

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "k": self.k,
            "mean_precision": self.mean_precision,
            "mean_recall": self.mean_recall,
            "queries": [
                {
                    "query_id": q.query_id,
                    "retrieved": list(q.retrieved),
                    "precision_at_k": q.precision_at_k,
                    "recall_at_k": q.recall_at_k,
                    "curve": [[r, p] for r, p in q.curve],
                }
                for q in self.queries
            ],
        }

    def table(self) -> str:
        """Aligned plain-text summary, one row per query plus a mean row."""
        width = max([len("query")] + [len(q.query_id) for q in self.queries])
        lines = [f"{'query':<{width}}  {'P@' + str(self.k):>8}  {'R@' + str(self.k):>8}"]
        for q in self.queries:
            lines.append(f"{q.query_id:<{width}}  {q.precision_at_k:>8.4f}  {q.recall_at_k:>8.4f}")
        lines.append(f"{'mean':<{width}}  {self.mean_precision:>8.4f}  {self.mean_recall:>8.4f}")
        return "\n".join(lines)


def evaluate_corpus(
    store: IndexStore, truth: GroundTruth, k: int, metric: str = "l2"
) -> EvalReport:
    """Per-query P@k, R@k and PR curve over indexed queries, plus corpus means."""
    reports = []
    for qid in sorted(truth.queries):
        relevant = truth.queries[qid]
        ranked = query_normalized(store, store.signatures[qid].norm_fv, k, metric)
        nir = sum(1 for r in ranked.results if r.image_id in relevant)
        counts = EvalCounts(nir=nir, tid=len(ranked), nid=len(relevant))
        reports.append(
            QueryReport(
                query_id=qid,
                retrieved=tuple(ranked.ids()),
                precision_at_k=precision(counts),
                recall_at_k=recall(counts),
                curve=tuple(pr_curve(ranked, set(relevant))),
            )
        )
    if not reports:
        raise NoRelevantSetError("ground truth contains no queries")
    return EvalReport(
        metric=str(metric),
        k=k,
        queries=tuple(reports),
        mean_precision=sum(q.precision_at_k for q in reports) / len(reports),
        mean_recall=sum(q.recall_at_k for q in reports) / len(reports),
    )
