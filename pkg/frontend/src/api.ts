// Thin fetch wrapper around the retrieval service. Everything the UI knows
// about the wire format lives here.

export type Label = 'relevant' | 'not_relevant' | 'neutral';

export const LABELS: readonly Label[] = ['relevant', 'not_relevant', 'neutral'];

export interface ResultEntry {
  image_id: string;
  score: number | null;
  thumbnail_url: string;
}

export interface RankingPayload {
  session_id: string;
  round: number;
  metric: string;
  k: number;
  higher_is_better: boolean;
  results: ResultEntry[];
}

export interface HealthPayload {
  status: string;
  index_loaded: boolean;
  images: number;
}

/** Request failure with the service's machine-readable code attached. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ServiceError';
  }
}

async function toServiceError(res: Response): Promise<ServiceError> {
  let code = `http_${res.status}`;
  let message = res.statusText || 'request failed';
  try {
    const body = await res.json();
    const detail = body?.detail;
    if (detail && typeof detail.code === 'string') {
      code = detail.code;
      message = typeof detail.message === 'string' ? detail.message : message;
    }
  } catch {
    // non-JSON error body, keep the generic message
  }
  return new ServiceError(res.status, code, message);
}

export class CbirClient {
  private thumbCache = new Map<string, string>();

  constructor(
    readonly baseUrl: string = '',
    private token: string = '',
  ) {}

  private authHeaders(): Record<string, string> {
    return this.token ? { Authorization: `Bearer ${this.token}` } : {};
  }

  private async ranking(res: Response): Promise<RankingPayload> {
    if (!res.ok) throw await toServiceError(res);
    return (await res.json()) as RankingPayload;
  }

  async health(): Promise<HealthPayload> {
    const res = await fetch(`${this.baseUrl}/api/health`);
    if (!res.ok) throw await toServiceError(res);
    return (await res.json()) as HealthPayload;
  }

  async queryByFile(file: File, k: number, metric: string): Promise<RankingPayload> {
    const form = new FormData();
    form.append('image', file, file.name);
    const res = await fetch(this.queryUrl(k, metric), {
      method: 'POST',
      headers: this.authHeaders(),
      body: form,
    });
    return this.ranking(res);
  }

  async queryByImageId(imageId: string, k: number, metric: string): Promise<RankingPayload> {
    const form = new FormData();
    form.append('image_id', imageId);
    const res = await fetch(this.queryUrl(k, metric), {
      method: 'POST',
      headers: this.authHeaders(),
      body: form,
    });
    return this.ranking(res);
  }

  async sendFeedback(sessionId: string, labels: Record<string, Label>): Promise<RankingPayload> {
    const res = await fetch(
      `${this.baseUrl}/api/sessions/${encodeURIComponent(sessionId)}/feedback`,
      {
        method: 'POST',
        headers: { 'Content-Type': 'application/json', ...this.authHeaders() },
        body: JSON.stringify(labels),
      },
    );
    return this.ranking(res);
  }

  /**
   * Fetch a thumbnail with the auth header and hand back an object URL.
   * Plain <img src> cannot carry Authorization, so the bytes go through
   * fetch once and get cached per session.
   */
  async thumbnailObjectUrl(thumbnailUrl: string): Promise<string> {
    const cached = this.thumbCache.get(thumbnailUrl);
    if (cached) return cached;
    const res = await fetch(`${this.baseUrl}${thumbnailUrl}`, {
      headers: this.authHeaders(),
    });
    if (!res.ok) throw await toServiceError(res);
    const url = URL.createObjectURL(await res.blob());
    this.thumbCache.set(thumbnailUrl, url);
    return url;
  }

  private queryUrl(k: number, metric: string): string {
    const params = new URLSearchParams({ k: String(k), metric });
    return `${this.baseUrl}/api/query?${params.toString()}`;
  }
}
