// Score value distribution bars, straight from the analysis payload.

import type { DistributionPayload } from "../api.js";
import { clear, el } from "../dom.js";

export function renderDistribution(
  container: HTMLElement,
  metric: string,
  payload: DistributionPayload,
): void {
  clear(container);
  container.classList.add("distribution-view");
  container.appendChild(el("h3", {}, `value distribution: ${metric} (${payload.total} observations)`));
  const list = el("div", { class: "bars" });
  const scores = Object.keys(payload.values).sort((a, b) => Number(b) - Number(a));
  for (const score of scores) {
    const fraction = payload.values[score];
    const row = el("div", { class: "bar-row", "data-score": score, "data-fraction": String(fraction) });
    row.appendChild(el("span", { class: "bar-label" }, score));
    const bar = el("span", { class: "bar" });
    bar.style.width = `${Math.round(fraction * 400)}px`;
    row.appendChild(bar);
    row.appendChild(el("span", { class: "bar-value" }, `${(fraction * 100).toFixed(2)}%`));
    list.appendChild(row);
  }
  container.appendChild(list);
}
