// Spatial/temporal heatmap: one table cell per (row, column) aggregate,
// values rendered exactly as served; unsupported combinations show NA.

import type { HeatmapPayload } from "../api.js";
import { clear, el } from "../dom.js";

function shade(value: number): string {
  // scores live in [1, 3]; brighter means higher
  const t = Math.max(0, Math.min(1, (value - 1) / 2));
  const level = Math.round(40 + t * 200);
  return `rgb(${level}, ${level}, ${level})`;
}

export function renderHeatmap(container: HTMLElement, payload: HeatmapPayload): void {
  clear(container);
  container.classList.add("heatmap-view");
  const table = el("table", { class: "heatmap" });

  const head = el("tr");
  head.appendChild(el("th", {}, ""));
  for (const col of payload.colLabels) {
    head.appendChild(el("th", { scope: "col" }, col));
  }
  table.appendChild(head);

  payload.rowLabels.forEach((rowLabel, i) => {
    const tr = el("tr", { "data-row": rowLabel });
    tr.appendChild(el("th", { scope: "row" }, rowLabel));
    payload.colLabels.forEach((colLabel, j) => {
      const value = payload.cells[i][j];
      const td = el(
        "td",
        { "data-row": rowLabel, "data-col": colLabel },
        value === null ? "NA" : String(value),
      );
      if (value === null) {
        td.classList.add("na");
      } else {
        td.style.background = shade(value);
        td.style.color = value >= 2 ? "#111" : "#eee";
      }
      tr.appendChild(td);
    });
    table.appendChild(tr);
  });

  container.appendChild(table);
}
