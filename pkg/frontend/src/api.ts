/**
 * Typed client for the /v1 elicitation service.
 *
 * The transport is injectable so tests can fake the network; the
 * default is the page's own fetch.
 */

export type RatingValue = "+1" | "-1" | "NA";

export interface Card {
  id: string;
  name: string;
  image_url: string | null;
}

export interface Batch {
  token: number;
  items: Card[];
}

export type SessionState = "burn_in" | "adaptive" | "done";

export interface RegionSummary {
  round: number;
  radius: number | null;
}

export interface SessionSnapshot {
  session_id?: string;
  state: SessionState;
  batch: Batch | null;
  recommendations?: Card[] | null;
  region: RegionSummary | null;
}

export interface RegionDetail {
  round: number;
  radius: number | null;
  center_history: number;
  center?: number[];
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export type Transport = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly transport: Transport = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.transport(`${this.baseUrl}${path}`, init);
    const body: unknown = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request("/v1/healthz");
  }

  createSession(): Promise<SessionSnapshot> {
    return this.post("/v1/sessions", {});
  }

  submitRatings(
    sessionId: string,
    token: number,
    ratings: Record<string, RatingValue>,
  ): Promise<SessionSnapshot> {
    return this.post(`/v1/sessions/${sessionId}/ratings`, { token, ratings });
  }

  region(sessionId: string, debug = false): Promise<RegionDetail> {
    const query = debug ? "?debug=true" : "";
    return this.request(`/v1/sessions/${sessionId}/region${query}`);
  }
}
