// DOM rendering. No framework: each function clears its target element and
// rebuilds it from the current view. The grid is a faithful render of the
// service payload, same order, same scores.

import { LABELS } from './api.js';
import type { Label } from './api.js';
import { hasJudgment } from './state.js';
import type { SessionView, CardView } from './state.js';

// 1x1 transparent gif shown until the real thumbnail bytes arrive.
const PLACEHOLDER =
  'data:image/gif;base64,R0lGODlhAQABAIAAAAAAAP///yH5BAEAAAAALAAAAAABAAEAAAIBRAA7';

const LABEL_TEXT: Record<Label, string> = {
  relevant: 'relevant',
  not_relevant: 'not relevant',
  neutral: 'neutral',
};

export interface RenderHooks {
  onLabel?: (imageId: string, label: Label) => void;
  loadThumb?: (img: HTMLImageElement, thumbnailUrl: string) => void;
}

export function formatScore(score: number | null): string {
  return score === null ? 'n/a' : score.toFixed(6);
}

function cardElement(card: CardView, hooks: RenderHooks): HTMLElement {
  const root = document.createElement('figure');
  root.className = 'card';
  root.dataset.imageId = card.imageId;

  const img = document.createElement('img');
  img.alt = card.imageId;
  img.src = PLACEHOLDER;
  if (hooks.loadThumb) hooks.loadThumb(img, card.thumbnailUrl);
  root.appendChild(img);

  const caption = document.createElement('figcaption');
  const name = document.createElement('div');
  name.className = 'image-id';
  name.textContent = card.imageId;
  const score = document.createElement('div');
  score.className = 'score';
  score.textContent = formatScore(card.score);
  caption.append(name, score);
  root.appendChild(caption);

  const buttons = document.createElement('div');
  buttons.className = 'labels';
  for (const label of LABELS) {
    const button = document.createElement('button');
    button.type = 'button';
    button.dataset.label = label;
    button.textContent = LABEL_TEXT[label];
    button.setAttribute('aria-pressed', String(card.label === label));
    button.addEventListener('click', () => hooks.onLabel?.(card.imageId, label));
    buttons.appendChild(button);
  }
  root.appendChild(buttons);
  return root;
}

export function renderGrid(
  container: HTMLElement,
  view: SessionView,
  hooks: RenderHooks = {},
): void {
  container.replaceChildren();
  for (const card of view.cards) {
    container.appendChild(cardElement(card, hooks));
  }
}

export function renderStatus(target: HTMLElement, view: SessionView | null): void {
  if (view === null) {
    target.textContent = 'no session';
    delete target.dataset.round;
    return;
  }
  target.dataset.round = String(view.round);
  const direction = view.higherIsBetter ? 'similarity' : 'distance';
  target.textContent =
    `${view.sessionId} · round ${view.round} · ${view.metric} (${direction}) · k=${view.k}`;
}

export function renderHistory(container: HTMLElement, view: SessionView | null): void {
  container.replaceChildren();
  if (view === null || view.history.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'empty';
    empty.textContent = 'no earlier rounds';
    container.appendChild(empty);
    return;
  }
  // newest first
  for (const record of [...view.history].reverse()) {
    const block = document.createElement('section');
    block.className = 'history-round';
    block.dataset.round = String(record.round);
    const head = document.createElement('h3');
    head.textContent = `round ${record.round}`;
    block.appendChild(head);
    const list = document.createElement('ol');
    record.imageIds.forEach((id, i) => {
      const item = document.createElement('li');
      item.textContent = `${formatScore(record.scores[i] ?? null)}  ${id}`;
      list.appendChild(item);
    });
    block.appendChild(list);
    container.appendChild(block);
  }
}

export function renderError(banner: HTMLElement, message: string | null): void {
  banner.textContent = message ?? '';
  banner.hidden = message === null;
}

/**
 * The refine control only comes alive when a view exists, at least one
 * label is non-neutral, and no request is in flight. Mirrors the service's
 * all-neutral 422 on the client side.
 */
export function syncRefineButton(
  button: HTMLButtonElement,
  view: SessionView | null,
  pending: boolean,
): void {
  button.disabled = pending || view === null || !hasJudgment(view);
}
