import type {
  AlignmentSpec,
  BoardRole,
  BoardSummary,
  ComparePayload,
  ExportKind,
  Report,
  TransformPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the session endpoints. All numbers surfaced by
 * the UI flow through here untouched. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: string,
    contentType = "application/json",
  ): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = body;
      init.headers = { "content-type": contentType };
    }
    const resp = await this.fetchFn(this.baseUrl + path, init);
    let payload: unknown = null;
    const text = await resp.text();
    if (text) {
      try {
        payload = JSON.parse(text);
      } catch {
        payload = text;
      }
    }
    if (!resp.ok) {
      const detail =
        payload && typeof payload === "object" && "detail" in payload
          ? (payload as { detail: unknown }).detail
          : payload;
      throw new ApiError(resp.status, detail);
    }
    return payload as T;
  }

  async createSession(): Promise<string> {
    const body = await this.request<{ id: string }>("POST", "/session");
    return body.id;
  }

  async uploadBoard(
    sessionId: string,
    role: BoardRole,
    content: string,
  ): Promise<BoardSummary> {
    return this.request<BoardSummary>(
      "POST",
      `/session/${sessionId}/board/${role}`,
      content,
      "application/octet-stream",
    );
  }

  async align(
    sessionId: string,
    spec: AlignmentSpec,
  ): Promise<TransformPayload> {
    return this.request<TransformPayload>(
      "POST",
      `/session/${sessionId}/align`,
      JSON.stringify(spec),
    );
  }

  async compare(
    sessionId: string,
    layers?: string[],
  ): Promise<ComparePayload> {
    const body = layers === undefined ? undefined : JSON.stringify({ layers });
    return this.request<ComparePayload>(
      "POST",
      `/session/${sessionId}/compare`,
      body,
    );
  }

  async analyze(
    sessionId: string,
    overrides?: Record<string, number>,
    persist = false,
  ): Promise<Report> {
    const doc: Record<string, unknown> = {};
    if (overrides && Object.keys(overrides).length > 0) {
      doc["overrides"] = overrides;
    }
    if (persist) {
      doc["persist"] = true;
    }
    return this.request<Report>(
      "POST",
      `/session/${sessionId}/analyze`,
      JSON.stringify(doc),
    );
  }

  exportUrl(sessionId: string, kind: ExportKind): string {
    return `${this.baseUrl}/session/${sessionId}/export/${kind}`;
  }
}
