/** HTTP client for the review service.
 *
 * Exactly one mutating request may be in flight: while busy, further
 * mutations are rejected so double-submits cannot happen.
 */

import type { HistoryPayload, StatePayload, Vec3 } from "./types.js";

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ReviewClient {
  busy = false;

  constructor(private base: string,
              private fetchImpl: typeof fetch = fetch) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.base + path);
    const body = await resp.json();
    if (!resp.ok) {
      throw new ServiceError(resp.status, body.error ?? resp.statusText);
    }
    return body as T;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    if (this.busy) {
      throw new ServiceError(0, "request already in flight");
    }
    this.busy = true;
    try {
      const resp = await this.fetchImpl(this.base + path, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload ?? {}),
      });
      const body = await resp.json();
      if (!resp.ok) {
        throw new ServiceError(resp.status, body.error ?? resp.statusText);
      }
      return body as T;
    } finally {
      this.busy = false;
    }
  }

  state(): Promise<StatePayload> {
    return this.get<StatePayload>("/state");
  }

  history(): Promise<HistoryPayload> {
    return this.get<HistoryPayload>("/history");
  }

  accept(): Promise<StatePayload> {
    return this.post<StatePayload>("/accept", {});
  }

  correct(positions: Vec3[]): Promise<StatePayload> {
    return this.post<StatePayload>("/correct", { positions });
  }

  seek(frame: number): Promise<StatePayload> {
    return this.post<StatePayload>("/seek", { frame });
  }

  /** Commit alternative k by posting its completed state as a correction. */
  async switchHypothesis(state: StatePayload, k: number): Promise<StatePayload> {
    const alts = state.alternatives ?? [];
    if (k < 0 || k >= alts.length) {
      throw new ServiceError(0, `no alternative ${k}`);
    }
    return this.correct(alts[k].positions);
  }
}
