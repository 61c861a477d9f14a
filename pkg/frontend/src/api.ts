/** Service client with latest-wins request handling.
 *
 * Each UI surface (solve panel, plan board, curve) posts under its own
 * key; a newer request under the same key aborts the one in flight, and
 * a response that is no longer the newest is reported as superseded so
 * the caller simply drops it. The display therefore never shows a
 * stale solve.
 */

import type { Problem } from "./types.js";

export type Outcome<T> =
  | { kind: "ok"; data: T }
  | { kind: "problem"; problem: Problem }
  | { kind: "superseded" };

type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;
  private readonly base: string;
  private controllers = new Map<string, AbortController>();
  private sequence = new Map<string, number>();

  constructor(base = "", fetchImpl?: FetchLike) {
    this.base = base.replace(/\/$/, "");
    this.fetchImpl =
      fetchImpl ?? ((url, init) => globalThis.fetch(url, init));
  }

  /** POST under a latest-wins key; older in-flight calls are aborted. */
  async post<T>(key: string, path: string, body: unknown): Promise<Outcome<T>> {
    this.controllers.get(key)?.abort();
    const controller = new AbortController();
    this.controllers.set(key, controller);
    const ticket = (this.sequence.get(key) ?? 0) + 1;
    this.sequence.set(key, ticket);

    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal: controller.signal,
      });
    } catch (err) {
      if (this.sequence.get(key) !== ticket) return { kind: "superseded" };
      return {
        kind: "problem",
        problem: {
          status: 0,
          code: "network",
          title: "request failed",
          detail: String(err),
        },
      };
    }
    // a newer request took over while this one was on the wire
    if (this.sequence.get(key) !== ticket) return { kind: "superseded" };

    let payload: unknown;
    try {
      payload = await response.json();
    } catch {
      return {
        kind: "problem",
        problem: {
          status: response.status,
          code: "internal",
          title: "malformed response",
          detail: "service returned a non-JSON body",
        },
      };
    }
    if (this.sequence.get(key) !== ticket) return { kind: "superseded" };
    if (!response.ok) {
      return { kind: "problem", problem: payload as Problem };
    }
    return { kind: "ok", data: payload as T };
  }
}
