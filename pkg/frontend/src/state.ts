// Client-side session state. The service owns the feature vectors; the
// browser only keeps the last payload, the user's labels, and the history
// of earlier rankings.

import type { Label, RankingPayload } from './api.js';

export interface CardView {
  imageId: string;
  score: number | null;
  thumbnailUrl: string;
  label: Label;
}

export interface RoundRecord {
  round: number;
  imageIds: string[];
  scores: (number | null)[];
}

export interface SessionView {
  sessionId: string;
  round: number;
  metric: string;
  k: number;
  higherIsBetter: boolean;
  cards: CardView[];
  history: RoundRecord[];
}

function recordRound(view: SessionView): RoundRecord {
  return {
    round: view.round,
    imageIds: view.cards.map((c) => c.imageId),
    scores: view.cards.map((c) => c.score),
  };
}

/**
 * Turn a service payload into the view state. Result order is taken from the
 * payload as-is and every label starts out neutral. When the payload is a
 * later round of the same session, the prior ranking is pushed onto the
 * history stack.
 */
export function viewFromPayload(
  payload: RankingPayload,
  prior: SessionView | null = null,
): SessionView {
  const continuesSession =
    prior !== null &&
    prior.sessionId === payload.session_id &&
    payload.round > prior.round;
  return {
    sessionId: payload.session_id,
    round: payload.round,
    metric: payload.metric,
    k: payload.k,
    higherIsBetter: payload.higher_is_better,
    cards: payload.results.map((r) => ({
      imageId: r.image_id,
      score: r.score,
      thumbnailUrl: r.thumbnail_url,
      label: 'neutral' as Label,
    })),
    history: continuesSession ? [...prior.history, recordRound(prior)] : [],
  };
}

export function setLabel(view: SessionView, imageId: string, label: Label): void {
  for (const card of view.cards) {
    if (card.imageId === imageId) card.label = label;
  }
}

/** Labels keyed by image id, exactly what the feedback endpoint expects. */
export function labelMap(view: SessionView): Record<string, Label> {
  const out: Record<string, Label> = {};
  for (const card of view.cards) out[card.imageId] = card.label;
  return out;
}

/** True once at least one card is labeled something other than neutral. */
export function hasJudgment(view: SessionView): boolean {
  return view.cards.some((c) => c.label !== 'neutral');
}

const STORAGE_KEY = 'cbir.session';

export function saveView(storage: Storage, view: SessionView): void {
  storage.setItem(STORAGE_KEY, JSON.stringify(view));
}

export function loadView(storage: Storage): SessionView | null {
  const raw = storage.getItem(STORAGE_KEY);
  if (raw === null) return null;
  try {
    const parsed = JSON.parse(raw) as SessionView;
    if (typeof parsed.sessionId !== 'string' || !Array.isArray(parsed.cards)) {
      return null;
    }
    return parsed;
  } catch {
    return null;
  }
}

export function clearView(storage: Storage): void {
  storage.removeItem(STORAGE_KEY);
}
