/**
 * Playback double for the flowsteps HTTP API.
 *
 * Serves responses recorded from the real server (tests/fixtures/*.json),
 * so every body matches the production wire format byte for byte. Firing
 * follows the recorded script; firing anything the current state does not
 * list as enabled gets the real 409 shape.
 */

import type {
  FiringReport,
  ModelsListing,
  NetInfo,
  SessionState,
} from "../src/types.js";

export interface RecordedFiring {
  transition: string;
  report: FiringReport;
  state_after: SessionState;
}

export interface Recording {
  models: ModelsListing;
  net: NetInfo;
  initial_state: SessionState;
  good: RecordedFiring[];
  broken: RecordedFiring[];
}

type Json = Record<string, unknown> | unknown[];

function jsonResponse(body: Json, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

function errorResponse(status: number, code: string, message: string): Response {
  return jsonResponse({ error: { code, message } }, status);
}

export class FakeEventSource {
  static instances: FakeEventSource[] = [];
  private listeners = new Map<string, Array<(event: MessageEvent) => void>>();
  closed = false;

  constructor(readonly url: string) {
    FakeEventSource.instances.push(this);
  }

  addEventListener(type: string, callback: (event: MessageEvent) => void): void {
    const list = this.listeners.get(type) ?? [];
    list.push(callback);
    this.listeners.set(type, list);
  }

  dispatch(type: string, data: unknown): void {
    if (this.closed) return;
    const event = new MessageEvent(type, { data: JSON.stringify(data) });
    for (const callback of this.listeners.get(type) ?? []) callback(event);
  }

  close(): void {
    this.closed = true;
  }
}

export class FakeFlowServer {
  private position = 0;
  requests: string[] = [];

  constructor(
    private readonly recording: Recording,
    private readonly variant: "good" | "broken" = "good",
  ) {}

  private get script(): RecordedFiring[] {
    return this.recording[this.variant];
  }

  currentState(): SessionState {
    return this.position === 0
      ? this.recording.initial_state
      : this.script[this.position - 1].state_after;
  }

  /** Replace global fetch/EventSource; returns an uninstall function. */
  install(): () => void {
    const originalFetch = globalThis.fetch;
    const originalEventSource = (globalThis as { EventSource?: unknown }).EventSource;
    FakeEventSource.instances = [];
    globalThis.fetch = (input, init) =>
      Promise.resolve(this.handle(String(input), init));
    (globalThis as { EventSource: unknown }).EventSource = FakeEventSource;
    return () => {
      globalThis.fetch = originalFetch;
      (globalThis as { EventSource?: unknown }).EventSource = originalEventSource;
    };
  }

  private broadcast(report: FiringReport): void {
    for (const source of FakeEventSource.instances) {
      source.dispatch("firing", report);
    }
  }

  handle(url: string, init?: RequestInit): Response {
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    this.requests.push(`${method} ${path}`);

    if (method === "GET" && path === "/models") {
      return jsonResponse(this.recording.models as unknown as Json);
    }
    if (method === "GET" && /^\/models\/[^/]+\/net$/.test(path)) {
      return jsonResponse(this.recording.net as unknown as Json);
    }
    if (method === "POST" && path === "/sessions") {
      this.position = 0;
      return jsonResponse(
        {
          session_id: "fake-session-1",
          created_at: 0,
          state: this.recording.initial_state,
        },
        201,
      );
    }
    const sessionMatch = path.match(/^\/sessions\/([^/]+)(?:\/(\w+))?$/);
    if (!sessionMatch) {
      return errorResponse(404, "not_found", `no route for ${path}`);
    }
    if (sessionMatch[1] !== "fake-session-1") {
      return errorResponse(404, "not_found", `no session ${sessionMatch[1]}`);
    }
    const action = sessionMatch[2];
    if (method === "GET" && action === "state") {
      return jsonResponse(this.currentState() as unknown as Json);
    }
    if (method === "POST" && action === "fire") {
      const body = JSON.parse(String(init?.body ?? "{}")) as { transition?: string };
      const transition = body.transition ?? "";
      const enabled = this.currentState().enabled.map((e) => e.id);
      if (!enabled.includes(transition)) {
        return errorResponse(
          409,
          "transition_not_enabled",
          `transition '${transition}' is not enabled`,
        );
      }
      const expected = this.script[this.position];
      if (!expected || expected.transition !== transition) {
        return errorResponse(
          500,
          "unexpected_order",
          `recording expected ${expected?.transition}, got ${transition}`,
        );
      }
      this.position += 1;
      this.broadcast(expected.report);
      return jsonResponse(expected.report as unknown as Json);
    }
    if (method === "POST" && action === "reset") {
      this.position = 0;
      return jsonResponse({ state: this.recording.initial_state } as unknown as Json);
    }
    if (method === "DELETE" && action === undefined) {
      return jsonResponse({ deleted: true });
    }
    if (method === "GET" && action === "events") {
      // the client uses EventSource for this path, never fetch
      return errorResponse(400, "invalid_request", "use EventSource for events");
    }
    return errorResponse(404, "not_found", `no route for ${method} ${path}`);
  }
}
