import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, BudgetExhaustedError, VendorClient } from "../src/api.js";
import { fakeFetch, fixture, jsonResponse } from "./helpers.js";

describe("api client", () => {
  it("deduplicates concurrent identical requests", async () => {
    const { fetchFn, calls } = fakeFetch([
      (url) => (url.includes("/v1/meta") ? jsonResponse(fixture("meta.json")) : undefined),
    ]);
    const api = new ApiClient("http://api", fetchFn);
    const [a, b] = await Promise.all([api.meta(), api.meta()]);
    expect(calls.length).toBe(1);
    expect(a).toEqual(b);
    await api.meta(); // a later call fetches again
    expect(calls.length).toBe(2);
  });

  it("follows record cursors to the end", async () => {
    const { fetchFn } = fakeFetch([
      (url) => {
        if (!url.includes("/v1/records")) return undefined;
        if (url.includes("cursor=next")) {
          return jsonResponse({ records: [{ ts: "b" }], nextCursor: null });
        }
        return jsonResponse({ records: [{ ts: "a" }], nextCursor: "next" });
      },
    ]);
    const api = new ApiClient("http://api", fetchFn);
    const rows = await api.allRecords({ metrics: "placementScore" });
    expect(rows.map((r: any) => r.ts)).toEqual(["a", "b"]);
  });

  it("maps error bodies onto typed errors", async () => {
    const exhausted = fixture<{ status: number; body: unknown }>("vendor_budget_exhausted.json");
    const { fetchFn } = fakeFetch([
      (url) =>
        url.includes("/v1/placement-score")
          ? jsonResponse(exhausted.body, exhausted.status)
          : jsonResponse({ code: "NotFound", message: "nope" }, 404),
    ]);
    const vendor = new VendorClient("http://vendor", fetchFn);
    await expect(vendor.placementScore("a", ["t"], ["r"], 1)).rejects.toBeInstanceOf(
      BudgetExhaustedError,
    );
    const api = new ApiClient("http://api", fetchFn);
    await expect(api.meta()).rejects.toBeInstanceOf(ApiError);
  });
});
