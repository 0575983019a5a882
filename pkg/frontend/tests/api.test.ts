import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, ConflictError } from "../src/api.js";
import { review } from "./helpers.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("sends the bearer token on every request", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ items: [], page: 1, page_size: 50, total: 0 }));
    const client = new ApiClient("http://api.test", "secret", fetchFn);
    await client.dayClusters("2024-06-21");
    const [url, init] = fetchFn.mock.calls[0];
    expect(url).toBe("http://api.test/days/2024-06-21/clusters");
    expect((init!.headers as Record<string, string>).Authorization).toBe("Bearer secret");
  });

  it("builds filter query parameters", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ items: [], page: 2, page_size: 50, total: 0 }));
    const client = new ApiClient("", "t", fetchFn);
    await client.dayClusters("2024-06-21", { disease: "Dengue", state: "Kerala", page: 2 });
    expect(fetchFn.mock.calls[0][0]).toBe(
      "/days/2024-06-21/clusters?disease=Dengue&state=Kerala&page=2",
    );
  });

  it("posts reviews as JSON", async () => {
    const fetchFn = vi.fn(async () => jsonResponse(review()));
    const client = new ApiClient("", "t", fetchFn);
    await client.postReview("c1", "shortlisted", "ncdc", "checked");
    const [url, init] = fetchFn.mock.calls[0];
    expect(url).toBe("/clusters/c1/review");
    expect(init!.method).toBe("POST");
    expect(JSON.parse(String(init!.body))).toEqual({
      decision: "shortlisted",
      reviewer: "ncdc",
      note: "checked",
    });
  });

  it("surfaces 409 as ConflictError carrying the existing review", async () => {
    const existing = review({ decision: "rejected" });
    const fetchFn = vi.fn(async () =>
      jsonResponse({ detail: "already decided", review: existing }, 409),
    );
    const client = new ApiClient("", "t", fetchFn);
    const error = await client.postReview("c1", "shortlisted", "x").catch((e) => e);
    expect(error).toBeInstanceOf(ConflictError);
    expect((error as ConflictError).existing).toEqual(existing);
  });

  it("maps other failures to ApiError with status", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ detail: "unknown cluster" }, 404));
    const client = new ApiClient("", "t", fetchFn);
    const error = await client.clusterDetail("ghost").catch((e) => e);
    expect(error).toBeInstanceOf(ApiError);
    expect((error as ApiError).status).toBe(404);
    expect((error as ApiError).message).toBe("unknown cluster");
  });
});
