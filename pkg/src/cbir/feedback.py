"""Multi-round query refinement from relevant / not-relevant / neutral labels.

The refined query is the classical additive update: move toward the mean of
the relevant vectors, away from the mean of the not-relevant ones, in the
store's normalized feature space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import AllNeutralError, ConfigMismatchError
from .index import IndexStore, RankedResults, Signature, query_normalized

LABELS = ("relevant", "not_relevant", "neutral")
DEFAULT_ALPHA = 1.0
DEFAULT_BETA = 0.75
DEFAULT_GAMMA = 0.25

_session_ids = itertools.count(1)


@dataclass(frozen=True)
class FeedbackRound:
    labels: dict[str, str]
    resulting_fv: np.ndarray


@dataclass
class FeedbackSession:
    """One refinement dialogue: the original query plus the label history."""

    session_id: str
    original_fv: np.ndarray
    current_fv: np.ndarray
    config_hash: str
    rounds: list[FeedbackRound] = field(default_factory=list)

    @property
    def round_number(self) -> int:
        return len(self.rounds)


def start_session(q: Signature, store: IndexStore) -> FeedbackSession:
    """Open a session whose current query equals the normalized query vector."""
    if q.config_hash != store.config_hash:
        raise ConfigMismatchError("query signature does not match the store configuration")
    norm = q.norm_fv if q.norm_fv is not None else store.normalize(q.raw_fv)
    norm = np.asarray(norm, dtype=np.float64).copy()
    return FeedbackSession(
        session_id=f"fs-{next(_session_ids):06d}",
        original_fv=norm.copy(),
        current_fv=norm,
        config_hash=store.config_hash,
    )


def rocchio(
    q: np.ndarray,
    relevant_fvs: list,
    not_relevant_fvs: list,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    gamma: float = DEFAULT_GAMMA,
) -> np.ndarray:
    """alpha*q + beta*mean(relevant) - gamma*mean(not relevant), clipped at 0.

    An absent class contributes nothing; clipping keeps the result inside the
    nonnegative normalized space.
    """
    refined = alpha * np.asarray(q, dtype=np.float64)
    if relevant_fvs:
        refined = refined + beta * np.mean(np.asarray(relevant_fvs, dtype=np.float64), axis=0)
    if not_relevant_fvs:
        refined = refined - gamma * np.mean(
            np.asarray(not_relevant_fvs, dtype=np.float64), axis=0
        )
    return np.maximum(refined, 0.0)


def apply_feedback(
    session: FeedbackSession,
    labels: dict[str, str],
    relevant_fvs: list,
    not_relevant_fvs: list,
    alpha: float = DEFAULT_ALPHA,
    beta: float = DEFAULT_BETA,
    gamma: float = DEFAULT_GAMMA,
) -> np.ndarray:
    """Refine the session's current query from one round of labels.

    relevant_fvs / not_relevant_fvs are the normalized vectors of the images
    labeled accordingly (neutral labels are recorded but never averaged).
    """
    bad = {i: l for i, l in labels.items() if l not in LABELS}
    if bad:
        raise ValueError(f"unknown labels: {bad}")
    n_relevant = sum(1 for l in labels.values() if l == "relevant")
    n_not = sum(1 for l in labels.values() if l == "not_relevant")
    if n_relevant == 0 and n_not == 0:
        raise AllNeutralError("every label is neutral; nothing to refine from")
    if n_relevant != len(relevant_fvs) or n_not != len(not_relevant_fvs):
        raise ValueError(
            f"label counts ({n_relevant} relevant, {n_not} not relevant) do not match "
            f"the supplied vectors ({len(relevant_fvs)}, {len(not_relevant_fvs)})"
        )
    refined = rocchio(session.current_fv, relevant_fvs, not_relevant_fvs, alpha, beta, gamma)
    session.rounds.append(FeedbackRound(labels=dict(labels), resulting_fv=refined.copy()))
    session.current_fv = refined
    return refined


def session_query(
    session: FeedbackSession, store: IndexStore, k: int, metric: str = "l2"
) -> RankedResults:
    """Rank the store against the session's current (possibly refined) query."""
    if session.config_hash != store.config_hash:
        raise ConfigMismatchError("session does not match the store configuration")
    return query_normalized(store, session.current_fv, k, metric)


def session_to_dict(session: FeedbackSession) -> dict:
    return {
        "session_id": session.session_id,
        "config_hash": session.config_hash,
        "original_fv": [float(v) for v in session.original_fv],
        "current_fv": [float(v) for v in session.current_fv],
        "rounds": [
            {
                "labels": dict(r.labels),
                "resulting_fv": [float(v) for v in r.resulting_fv],
            }
            for r in session.rounds
        ],
    }


def session_from_dict(doc: dict) -> FeedbackSession:
    return FeedbackSession(
        session_id=doc["session_id"],
        original_fv=np.array(doc["original_fv"], dtype=np.float64),
        current_fv=np.array(doc["current_fv"], dtype=np.float64),
        config_hash=doc["config_hash"],
        rounds=[
            FeedbackRound(
                labels=dict(r["labels"]),
                resulting_fv=np.array(r["resulting_fv"], dtype=np.float64),
            )
            for r in doc["rounds"]
        ],
    )
