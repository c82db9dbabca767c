import { describe, expect, it } from "vitest";

import type { HeatmapPayload } from "../src/api.js";
import { renderHeatmap } from "../src/views/heatmap.js";
import { fixture } from "./helpers.js";

describe("heatmap view", () => {
  it("renders every cell byte-equal to the analysis payload", () => {
    const payload = fixture<HeatmapPayload>("heatmap.json");
    const host = document.createElement("div");
    renderHeatmap(host, payload);

    payload.rowLabels.forEach((row, i) => {
      payload.colLabels.forEach((col, j) => {
        const cell = host.querySelector(`td[data-row="${row}"][data-col="${col}"]`);
        expect(cell, `${row} x ${col}`).not.toBeNull();
        const want = payload.cells[i][j] === null ? "NA" : String(payload.cells[i][j]);
        expect(cell!.textContent).toBe(want);
      });
    });
    // NA cells are visually distinct
    const naCount = payload.cells.flat().filter((v) => v === null).length;
    expect(host.querySelectorAll("td.na").length).toBe(naCount);
  });

  it("keeps all-NA rows instead of dropping them", () => {
    const payload: HeatmapPayload = {
      rowLabels: ["general", "storage-optimized"],
      colLabels: ["us-east-1"],
      cells: [[2.5], [null]],
    };
    const host = document.createElement("div");
    renderHeatmap(host, payload);
    const row = host.querySelector('tr[data-row="storage-optimized"]');
    expect(row).not.toBeNull();
    expect(row!.querySelector("td")!.textContent).toBe("NA");
  });

  it("renders a single cell as a 1x1 grid", () => {
    const payload: HeatmapPayload = {
      rowLabels: ["general"],
      colLabels: ["day0"],
      cells: [[1.75]],
    };
    const host = document.createElement("div");
    renderHeatmap(host, payload);
    expect(host.querySelectorAll("td").length).toBe(1);
    expect(host.querySelector("td")!.textContent).toBe("1.75");
  });
});
