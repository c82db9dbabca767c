// Dashboard view state: the active view plus filters, kept valid against the
// /v1/meta catalog at all times.

import type { Catalog } from "./api.js";

export type ViewName = "series" | "heatmap" | "distribution" | "whatif";

export interface Filters {
  instanceTypes: string[];
  regions: string[];
  azs: string[];
  metrics: string[];
  from?: string;
  to?: string;
}

export class ViewState {
  view: ViewName = "series";
  private filters: Filters = { instanceTypes: [], regions: [], azs: [], metrics: [] };

  constructor(private catalog: Catalog) {}

  setView(view: ViewName): void {
    this.view = view;
  }

  setFilters(update: Partial<Filters>): Filters {
    const next = { ...this.filters, ...update };
    this.filters = {
      instanceTypes: next.instanceTypes.filter((t) => this.catalog.instances.includes(t)),
      regions: next.regions.filter((r) => this.catalog.regions.includes(r)),
      azs: next.azs.filter((a) => this.catalog.azs.includes(a)),
      metrics: next.metrics.filter((m) => this.catalog.metrics.includes(m)),
      from: next.from,
      to: next.to,
    };
    return this.filters;
  }

  current(): Filters {
    return this.filters;
  }

  recordParams(): { [key: string]: string | undefined } {
    const f = this.filters;
    return {
      instanceTypes: f.instanceTypes.join(",") || undefined,
      regions: f.regions.join(",") || undefined,
      azs: f.azs.join(",") || undefined,
      metrics: f.metrics.join(",") || undefined,
      from: f.from,
      to: f.to,
    };
  }
}
