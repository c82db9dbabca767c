// Time-series explorer: one step line per (instance, location, metric),
// up to two value axes (one per metric).

import type { RecordRow } from "../api.js";
import { clear, el, svgEl } from "../dom.js";

export interface Series {
  key: string; // "instance @ location / metric"
  metric: string;
  points: { ts: string; value: number }[];
}

const WIDTH = 720;
const HEIGHT = 260;
const PAD = 36;

export function groupSeries(records: RecordRow[]): Series[] {
  const byKey = new Map<string, Series>();
  for (const row of records) {
    const location = row.az ?? row.region;
    const key = `${row.instance} @ ${location} / ${row.metric}`;
    let series = byKey.get(key);
    if (!series) {
      series = { key, metric: row.metric, points: [] };
      byKey.set(key, series);
    }
    series.points.push({ ts: row.ts, value: row.value });
  }
  const out = [...byKey.values()];
  out.sort((a, b) => (a.key < b.key ? -1 : 1));
  for (const s of out) {
    s.points.sort((a, b) => (a.ts < b.ts ? -1 : a.ts > b.ts ? 1 : 0));
  }
  return out;
}

function stepPath(xs: number[], ys: number[]): string {
  let d = `M ${xs[0]} ${ys[0]}`;
  for (let i = 1; i < xs.length; i++) {
    d += ` H ${xs[i]} V ${ys[i]}`;
  }
  return d;
}

const STROKES = ["#1a1a1a", "#356fb2", "#b24735", "#3f8f4e", "#8256a8", "#a8771f"];

export function renderSeries(container: HTMLElement, records: RecordRow[]): void {
  clear(container);
  container.classList.add("series-view");
  if (records.length === 0) {
    container.appendChild(el("div", { class: "empty-state" }, "no data for the current filters"));
    return;
  }

  const series = groupSeries(records);
  const metrics = [...new Set(series.map((s) => s.metric))].sort();
  const axisOf = new Map(metrics.map((m, i) => [m, Math.min(i, 1)]));

  const allTs = [...new Set(records.map((r) => r.ts))].sort();
  const tIndex = new Map(allTs.map((t, i) => [t, i]));
  const spanX = Math.max(allTs.length - 1, 1);

  const ranges: { lo: number; hi: number }[] = [];
  for (let axis = 0; axis < Math.min(metrics.length, 2); axis++) {
    const values = series
      .filter((s) => axisOf.get(s.metric) === axis)
      .flatMap((s) => s.points.map((p) => p.value));
    let lo = Math.min(...values);
    let hi = Math.max(...values);
    if (lo === hi) {
      lo -= 0.5;
      hi += 0.5;
    }
    ranges.push({ lo, hi });
  }

  const svg = svgEl("svg", {
    viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
    width: String(WIDTH),
    height: String(HEIGHT),
    class: "series-chart",
  });

  series.forEach((s, idx) => {
    const axis = axisOf.get(s.metric)!;
    const { lo, hi } = ranges[axis];
    const xs = s.points.map((p) => PAD + ((WIDTH - 2 * PAD) * tIndex.get(p.ts)!) / spanX);
    const ys = s.points.map(
      (p) => HEIGHT - PAD - ((HEIGHT - 2 * PAD) * (p.value - lo)) / (hi - lo),
    );
    const group = svgEl("g", {
      class: "series-line",
      "data-key": s.key,
      "data-axis": String(axis),
      "data-values": s.points.map((p) => String(p.value)).join(","),
      "data-count": String(s.points.length),
    });
    group.appendChild(
      svgEl("path", {
        d: stepPath(xs, ys),
        fill: "none",
        stroke: STROKES[idx % STROKES.length],
        "stroke-width": "1.4",
      }),
    );
    svg.appendChild(group);
  });

  container.appendChild(svg);

  const legend = el("ul", { class: "legend" });
  series.forEach((s, idx) => {
    const item = el("li", { "data-key": s.key });
    const swatch = el("span", { class: "swatch" });
    swatch.style.background = STROKES[idx % STROKES.length];
    item.appendChild(swatch);
    item.appendChild(document.createTextNode(` ${s.key} (axis ${axisOf.get(s.metric)! + 1})`));
    legend.appendChild(item);
  });
  container.appendChild(legend);

  const axes = el("div", { class: "axes-note" });
  axes.textContent = metrics
    .slice(0, 2)
    .map((m, i) => `axis ${i + 1}: ${m} [${ranges[i].lo}..${ranges[i].hi}]`)
    .join(" | ");
  container.appendChild(axes);
}
