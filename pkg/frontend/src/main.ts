// Entry point: wires the form controls, the result grid and the history
// panel to the retrieval service.

import { CbirClient, ServiceError } from './api.js';
import type { Label } from './api.js';
import {
  clearView,
  labelMap,
  loadView,
  saveView,
  setLabel,
  viewFromPayload,
} from './state.js';
import type { SessionView } from './state.js';
import {
  renderError,
  renderGrid,
  renderHistory,
  renderStatus,
  syncRefineButton,
} from './render.js';

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const tokenInput = byId<HTMLInputElement>('token');
const serverInput = byId<HTMLInputElement>('server');
const fileInput = byId<HTMLInputElement>('file');
const metricSelect = byId<HTMLSelectElement>('metric');
const kInput = byId<HTMLInputElement>('k');
const queryButton = byId<HTMLButtonElement>('query');
const refineButton = byId<HTMLButtonElement>('refine');
const forgetButton = byId<HTMLButtonElement>('forget');
const banner = byId<HTMLElement>('banner');
const statusLine = byId<HTMLElement>('status');
const grid = byId<HTMLElement>('grid');
const historyPanel = byId<HTMLElement>('history');

let view: SessionView | null = null;
let pending = false;
let lastFile: File | null = null;

function client(): CbirClient {
  return new CbirClient(serverInput.value.replace(/\/+$/, ''), tokenInput.value);
}

function loadThumb(img: HTMLImageElement, thumbnailUrl: string): void {
  client()
    .thumbnailObjectUrl(thumbnailUrl)
    .then((url) => {
      img.src = url;
    })
    .catch(() => {
      // keep the placeholder; the id and score still identify the card
    });
}

function redraw(): void {
  renderStatus(statusLine, view);
  renderHistory(historyPanel, view);
  if (view) {
    renderGrid(grid, view, { onLabel: handleLabel, loadThumb });
    saveView(window.localStorage, view);
  } else {
    grid.replaceChildren();
  }
  syncRefineButton(refineButton, view, pending);
  queryButton.disabled = pending;
}

function showError(err: unknown): void {
  if (err instanceof ServiceError) {
    renderError(banner, `${err.code}: ${err.message}`);
  } else {
    renderError(banner, err instanceof Error ? err.message : String(err));
  }
}

function handleLabel(imageId: string, label: Label): void {
  if (!view) return;
  setLabel(view, imageId, label);
  redraw();
}

async function runQuery(): Promise<void> {
  const file = fileInput.files?.[0] ?? lastFile;
  if (!file) {
    renderError(banner, 'pick an image file first');
    return;
  }
  lastFile = file;
  pending = true;
  renderError(banner, null);
  redraw();
  try {
    const payload = await client().queryByFile(
      file,
      Number(kInput.value) || 10,
      metricSelect.value,
    );
    view = viewFromPayload(payload, null);
  } catch (err) {
    showError(err);
  } finally {
    pending = false;
    redraw();
  }
}

async function runRefine(): Promise<void> {
  if (!view) return;
  pending = true;
  renderError(banner, null);
  redraw();
  try {
    const payload = await client().sendFeedback(view.sessionId, labelMap(view));
    view = viewFromPayload(payload, view);
  } catch (err) {
    showError(err);
  } finally {
    pending = false;
    redraw();
  }
}

function forgetSession(): void {
  view = null;
  lastFile = null;
  clearView(window.localStorage);
  renderError(banner, null);
  redraw();
}

queryButton.addEventListener('click', () => void runQuery());
refineButton.addEventListener('click', () => void runRefine());
forgetButton.addEventListener('click', forgetSession);
fileInput.addEventListener('change', () => void runQuery());
metricSelect.addEventListener('change', () => {
  // a metric switch re-runs the query when an image has been chosen
  if (lastFile) void runQuery();
});

// resume the last session from storage, if any
view = loadView(window.localStorage);
redraw();
