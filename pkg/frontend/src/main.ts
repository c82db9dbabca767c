// App shell: filter form driven by /v1/meta, view switching, 10-second
// polling of the active view, and an error banner when the API is down.

import { ApiClient, VendorClient } from "./api.js";
import { clear, el } from "./dom.js";
import { ViewState, type ViewName } from "./state.js";
import { renderDistribution } from "./views/distribution.js";
import { renderHeatmap } from "./views/heatmap.js";
import { renderSeries } from "./views/series.js";
import { WhatIfPanel, type Candidate } from "./views/whatif.js";

const POLL_MS = 10_000;

declare global {
  interface Window {
    SPOTLAKE_API_BASE?: string;
    SPOTLAKE_VENDOR_BASE?: string;
  }
}

function multiSelect(id: string, label: string, options: string[]): HTMLSelectElement {
  const select = el("select", { id, multiple: "multiple", size: "4", "aria-label": label });
  for (const option of options) {
    select.appendChild(el("option", { value: option }, option));
  }
  return select;
}

function selected(select: HTMLSelectElement): string[] {
  return [...select.selectedOptions].map((o) => o.value);
}

export async function startApp(root: HTMLElement): Promise<void> {
  const apiBase = window.SPOTLAKE_API_BASE ?? "http://127.0.0.1:8000";
  const vendorBase = window.SPOTLAKE_VENDOR_BASE ?? "http://127.0.0.1:8001";
  const api = new ApiClient(apiBase);
  const vendor = new VendorClient(vendorBase);

  const banner = el("div", { class: "error-banner", hidden: "hidden" });
  const controls = el("div", { class: "controls" });
  const viewHost = el("div", { class: "view-host" });
  root.appendChild(banner);
  root.appendChild(controls);
  root.appendChild(viewHost);

  let meta: Awaited<ReturnType<ApiClient["meta"]>>;
  try {
    meta = await api.meta();
  } catch (err) {
    banner.hidden = false;
    banner.textContent = `archive API unreachable at ${apiBase}: ${err}`;
    return;
  }
  const state = new ViewState(meta.catalog);
  state.setFilters({ metrics: ["placementScore"] });

  const instanceSel = multiSelect("f-instances", "instance types", meta.catalog.instances);
  const regionSel = multiSelect("f-regions", "regions", meta.catalog.regions);
  const azSel = multiSelect("f-azs", "availability zones", meta.catalog.azs);
  const metricSel = multiSelect("f-metrics", "metrics", meta.catalog.metrics);
  const viewSel = el("select", { id: "f-view" });
  for (const name of ["series", "heatmap", "distribution", "whatif"]) {
    viewSel.appendChild(el("option", { value: name }, name));
  }
  const apply = el("button", {}, "apply");
  for (const [label, node] of [
    ["view", viewSel],
    ["types", instanceSel],
    ["regions", regionSel],
    ["AZs", azSel],
    ["metrics", metricSel],
  ] as const) {
    const wrap = el("label", { class: "control" }, label + " ");
    wrap.appendChild(node);
    controls.appendChild(wrap);
  }
  controls.appendChild(apply);

  const whatIf = new WhatIfPanel(viewHost, api, vendor);
  let refreshing = false;

  async function refresh(): Promise<void> {
    if (refreshing) {
      return;
    }
    refreshing = true;
    try {
      banner.hidden = true;
      const view = state.view;
      if (view === "series") {
        const records = await api.allRecords(state.recordParams());
        renderSeries(viewHost, records);
      } else if (view === "heatmap") {
        const metric = state.current().metrics[0] ?? "placementScore";
        renderHeatmap(viewHost, await api.heatmap("familyClass", "region", metric));
      } else if (view === "distribution") {
        const metric = state.current().metrics[0] ?? "placementScore";
        renderDistribution(viewHost, metric, await api.distribution(metric));
      } else {
        const candidates: Candidate[] = state
          .current()
          .instanceTypes.map((t) => ({
            instanceType: t,
            regions: state.current().regions.length ? state.current().regions : meta.catalog.regions.slice(0, 1),
            capacity: 1,
          }));
        if (candidates.length === 0) {
          clear(viewHost);
          viewHost.appendChild(el("div", { class: "empty-state" }, "select instance types to compare"));
        } else {
          await whatIf.compare(candidates);
        }
      }
    } catch (err) {
      banner.hidden = false;
      banner.textContent = `request failed: ${err}`;
    } finally {
      refreshing = false;
    }
  }

  apply.addEventListener("click", () => {
    state.setView(viewSel.value as ViewName);
    state.setFilters({
      instanceTypes: selected(instanceSel),
      regions: selected(regionSel),
      azs: selected(azSel),
      metrics: selected(metricSel),
    });
    void refresh();
  });

  await refresh();
  setInterval(() => void refresh(), POLL_MS);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void startApp(document.getElementById("app")!);
}
