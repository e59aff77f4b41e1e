import type {
  FiringReport,
  ModelsListing,
  NetInfo,
  SessionHandle,
  SessionState,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface CreateSessionBody {
  model: string;
  bindings?: string;
  sut?: string;
  advance_on_failure?: boolean;
}

/** Thin client over the flowsteps HTTP API; the server owns all net logic. */
export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    const body = await response.json();
    if (!response.ok) {
      const error = (body as { error?: { code?: string; message?: string } }).error;
      throw new ApiError(
        response.status,
        error?.code ?? "unknown",
        error?.message ?? `request failed with ${response.status}`,
      );
    }
    return body as T;
  }

  listModels(): Promise<ModelsListing> {
    return this.request("/models");
  }

  getNet(model: string): Promise<NetInfo> {
    return this.request(`/models/${encodeURIComponent(model)}/net`);
  }

  createSession(body: CreateSessionBody): Promise<SessionHandle> {
    return this.request("/sessions", { method: "POST", body: JSON.stringify(body) });
  }

  getState(sessionId: string): Promise<SessionState> {
    return this.request(`/sessions/${sessionId}/state`);
  }

  fire(sessionId: string, transition: string): Promise<FiringReport> {
    return this.request(`/sessions/${sessionId}/fire`, {
      method: "POST",
      body: JSON.stringify({ transition }),
    });
  }

  reset(sessionId: string): Promise<{ state: SessionState }> {
    return this.request(`/sessions/${sessionId}/reset`, { method: "POST" });
  }

  deleteSession(sessionId: string): Promise<{ deleted: boolean }> {
    return this.request(`/sessions/${sessionId}`, { method: "DELETE" });
  }

  /** Subscribe to firing reports; returns the EventSource so callers can close it. */
  openEvents(sessionId: string, onReport: (report: FiringReport) => void): EventSource {
    const source = new EventSource(`${this.baseUrl}/sessions/${sessionId}/events`);
    source.addEventListener("firing", (event) => {
      onReport(JSON.parse((event as MessageEvent).data) as FiringReport);
    });
    return source;
  }
}
