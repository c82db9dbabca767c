// What-if comparison: issue live placement-score queries for candidate
// (type, regions, capacity) choices, rank them, and show 30-day history
// sparklines plus the predicted outcome. The per-account query budget is
// always visible; on exhaustion a warning appears and the last known scores
// stay on screen.

import { ApiClient, BudgetExhaustedError, VendorClient, type RecordRow } from "../api.js";
import { clear, el, svgEl } from "../dom.js";

export interface Candidate {
  instanceType: string;
  regions: string[];
  capacity: number;
}

interface CandidateRow {
  candidate: Candidate;
  score: number | null; // best current score among returned locations
  bestLocation: string | null;
  cached: boolean;
  prediction: string;
  history: number[];
}

function candidateKey(c: Candidate): string {
  return `${c.instanceType}|${[...c.regions].sort().join(",")}|${c.capacity}`;
}

function sparkline(values: number[]): SVGElement {
  const width = 120;
  const height = 24;
  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "sparkline",
    "data-points": String(values.length),
  });
  if (values.length >= 2) {
    const lo = Math.min(...values);
    const hi = Math.max(...values);
    const span = hi - lo || 1;
    const step = width / (values.length - 1);
    const points = values
      .map((v, i) => `${(i * step).toFixed(2)},${(height - 2 - ((v - lo) / span) * (height - 4)).toFixed(2)}`)
      .join(" ");
    svg.appendChild(svgEl("polyline", { points, fill: "none", stroke: "#356fb2", "stroke-width": "1" }));
  }
  return svg;
}

export class WhatIfPanel {
  private lastScores = new Map<string, { score: number | null; bestLocation: string | null }>();

  constructor(
    private container: HTMLElement,
    private api: ApiClient,
    private vendor: VendorClient,
    private account = "dashboard",
    private historyDays = 30,
  ) {}

  async compare(candidates: Candidate[]): Promise<void> {
    let budgetHit = false;
    const rows: CandidateRow[] = [];
    for (const candidate of candidates) {
      const key = candidateKey(candidate);
      let score: number | null = null;
      let bestLocation: string | null = null;
      let cached = false;
      try {
        const results = await this.vendor.placementScore(
          this.account,
          [candidate.instanceType],
          candidate.regions,
          candidate.capacity,
        );
        if (results.length) {
          score = results[0].score;
          bestLocation = results[0].location;
        }
        this.lastScores.set(key, { score, bestLocation });
      } catch (err) {
        if (err instanceof BudgetExhaustedError) {
          budgetHit = true;
          const last = this.lastScores.get(key);
          score = last?.score ?? null;
          bestLocation = last?.bestLocation ?? null;
          cached = last !== undefined;
        } else {
          throw err;
        }
      }
      rows.push({
        candidate,
        score,
        bestLocation,
        cached,
        prediction: await this.predictionFor(candidate, bestLocation),
        history: await this.historyFor(candidate),
      });
    }

    rows.sort((a, b) => (b.score ?? -1) - (a.score ?? -1));
    const budget = await this.vendor.budget(this.account).catch(() => null);
    this.render(rows, budgetHit, budget?.remaining ?? null);
  }

  private async predictionFor(candidate: Candidate, bestLocation: string | null): Promise<string> {
    if (!bestLocation) {
      return "n/a";
    }
    try {
      const prediction = await this.api.predict(candidate.instanceType, bestLocation);
      return prediction.label ?? prediction.status;
    } catch {
      return "n/a";
    }
  }

  private async historyFor(candidate: Candidate): Promise<number[]> {
    try {
      const rows: RecordRow[] = await this.api.allRecords({
        instanceTypes: candidate.instanceType,
        regions: candidate.regions.join(","),
        metrics: "placementScore",
      });
      return rows.map((r) => r.value);
    } catch {
      return [];
    }
  }

  private render(rows: CandidateRow[], budgetHit: boolean, remaining: number | null): void {
    clear(this.container);
    this.container.classList.add("whatif-view");

    const budgetNote = el("div", {
      class: "budget-note" + (budgetHit ? " budget-exhausted" : ""),
      "data-remaining": remaining === null ? "" : String(remaining),
    });
    budgetNote.textContent =
      remaining === null
        ? "query budget: unknown"
        : `query budget: ${remaining} unique queries remaining (24 h window)`;
    this.container.appendChild(budgetNote);

    if (budgetHit) {
      this.container.appendChild(
        el(
          "div",
          { class: "warning", role: "alert" },
          "query budget exhausted; showing cached scores where available",
        ),
      );
    }

    const table = el("table", { class: "whatif" });
    const head = el("tr");
    for (const title of ["rank", "candidate", "current score", "history", "predicted outcome"]) {
      head.appendChild(el("th", {}, title));
    }
    table.appendChild(head);

    rows.forEach((row, idx) => {
      const tr = el("tr", {
        "data-candidate": candidateKey(row.candidate),
        "data-score": row.score === null ? "" : String(row.score),
        "data-cached": String(row.cached),
      });
      tr.appendChild(el("td", {}, String(idx + 1)));
      tr.appendChild(
        el(
          "td",
          {},
          `${row.candidate.instanceType} in ${row.candidate.regions.join(", ")} x${row.candidate.capacity}`,
        ),
      );
      const scoreText =
        row.score === null ? "-" : `${row.score}${row.bestLocation ? ` (${row.bestLocation})` : ""}`;
      tr.appendChild(el("td", { class: row.cached ? "cached" : "" }, scoreText + (row.cached ? " [cached]" : "")));
      const historyCell = el("td", {});
      if (row.history.length >= 2) {
        historyCell.appendChild(sparkline(row.history));
      } else {
        historyCell.appendChild(el("span", { class: "empty-sparkline" }, "no history"));
      }
      tr.appendChild(historyCell);
      tr.appendChild(el("td", { class: "prediction" }, row.prediction));
      table.appendChild(tr);
    });

    this.container.appendChild(table);
  }
}
