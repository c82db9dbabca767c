import { describe, expect, it } from "vitest";

import { startApp } from "../src/main.js";
import { fakeFetch, fixture, jsonResponse } from "./helpers.js";

describe("app shell", () => {
  it("shows an error banner instead of crashing when the API is down", async () => {
    const failing = async () => {
      throw new TypeError("fetch failed");
    };
    (globalThis as any).fetch = failing;
    const root = document.createElement("div");
    await startApp(root);
    const banner = root.querySelector(".error-banner") as HTMLElement;
    expect(banner).not.toBeNull();
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("unreachable");
  });

  it("boots the series view from live metadata", async () => {
    const meta = fixture("meta.json");
    const { fetchFn } = fakeFetch([
      (url) => (url.includes("/v1/meta") ? jsonResponse(meta) : undefined),
      (url) => (url.includes("/v1/records") ? jsonResponse({ records: [], nextCursor: null }) : undefined),
    ]);
    (globalThis as any).fetch = fetchFn;
    const root = document.createElement("div");
    await startApp(root);
    expect(root.querySelector(".empty-state")).not.toBeNull();
    expect(root.querySelectorAll("select").length).toBe(5);
    const banner = root.querySelector(".error-banner") as HTMLElement;
    expect(banner.hidden).toBe(true);
  });
});
