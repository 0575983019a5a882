// Typed client for the review API. All requests carry the bearer token;
// a 409 on review posts surfaces the existing decision so views can
// reconcile instead of guessing.

import type {
  ClusterDetail,
  ClusterPage,
  Decision,
  ReviewPayload,
  SourceFlagPayload,
  StatsPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ConflictError extends ApiError {
  constructor(
    message: string,
    public readonly existing: ReviewPayload | null,
  ) {
    super(409, message);
    this.name = "ConflictError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.token}`,
      ...(init.body ? { "Content-Type": "application/json" } : {}),
    };
    const response = await this.fetchFn(`${this.baseUrl}${path}`, { ...init, headers });
    if (response.status === 409) {
      const body = await response.json().catch(() => ({}));
      throw new ConflictError(body.detail ?? "already decided", body.review ?? null);
    }
    if (!response.ok) {
      const body = await response.json().catch(() => ({}));
      throw new ApiError(response.status, body.detail ?? response.statusText);
    }
    return (await response.json()) as T;
  }

  dayClusters(
    day: string,
    opts: { disease?: string; state?: string; page?: number } = {},
  ): Promise<ClusterPage> {
    const params = new URLSearchParams();
    if (opts.disease) params.set("disease", opts.disease);
    if (opts.state) params.set("state", opts.state);
    if (opts.page) params.set("page", String(opts.page));
    const query = params.toString();
    return this.request(`/days/${day}/clusters${query ? `?${query}` : ""}`);
  }

  clusterDetail(id: string): Promise<ClusterDetail> {
    return this.request(`/clusters/${id}`);
  }

  postReview(
    clusterId: string,
    decision: Decision,
    reviewer: string,
    note = "",
  ): Promise<ReviewPayload> {
    return this.request(`/clusters/${clusterId}/review`, {
      method: "POST",
      body: JSON.stringify({ decision, reviewer, note }),
    });
  }

  flagSource(domain: string, reason: string, reviewer = ""): Promise<SourceFlagPayload> {
    return this.request(`/sources/${domain}/flag`, {
      method: "POST",
      body: JSON.stringify({ reason, reviewer }),
    });
  }

  confirmSource(domain: string): Promise<SourceFlagPayload> {
    return this.request(`/sources/${domain}/confirm`, { method: "POST" });
  }

  sources(): Promise<{ items: SourceFlagPayload[] }> {
    return this.request("/sources");
  }

  blocklist(): Promise<{ domains: string[] }> {
    return this.request("/sources/blocklist");
  }

  stats(from?: string, to?: string): Promise<StatsPayload> {
    const params = new URLSearchParams();
    if (from) params.set("from", from);
    if (to) params.set("to", to);
    const query = params.toString();
    return this.request(`/stats${query ? `?${query}` : ""}`);
  }

  runPipeline(day: string): Promise<{ date: string; clusters: number }> {
    return this.request("/pipeline/run", {
      method: "POST",
      body: JSON.stringify({ date: day }),
    });
  }
}
