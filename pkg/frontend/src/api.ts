// Typed clients for the archive API and the vendor simulator API.
// Concurrent identical requests share one in-flight fetch per client.

export interface Catalog {
  instances: string[];
  regions: string[];
  azs: string[];
  metrics: string[];
}

export interface MetaPayload {
  catalog: Catalog;
  span: { from: string; to: string } | null;
  records: number;
}

export interface RecordRow {
  ts: string;
  instance: string;
  region: string;
  az: string | null;
  metric: string;
  value: number;
}

export interface RecordsPage {
  records: RecordRow[];
  nextCursor: string | null;
}

export interface HeatmapPayload {
  rowLabels: string[];
  colLabels: string[];
  cells: (number | null)[][];
}

export interface DistributionPayload {
  values: { [score: string]: number };
  counts: { [score: string]: number };
  total: number;
}

export interface PredictPayload {
  instance: string;
  az: string;
  label: string | null;
  status: string;
}

export interface PlacementResult {
  location: string;
  score: number;
}

export interface BudgetState {
  account: string;
  limit: number;
  used: number;
  remaining: number;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export class BudgetExhaustedError extends ApiError {}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function checked(resp: Response): Promise<any> {
  if (resp.ok) {
    return resp.json();
  }
  let code = "HttpError";
  let message = `${resp.status}`;
  try {
    const body = await resp.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  if (code === "QueryBudgetExhausted") {
    throw new BudgetExhaustedError(resp.status, code, message);
  }
  throw new ApiError(resp.status, code, message);
}

function query(params: { [key: string]: string | number | undefined }): string {
  const parts: string[] = [];
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined && value !== "") {
      parts.push(`${encodeURIComponent(key)}=${encodeURIComponent(String(value))}`);
    }
  }
  return parts.length ? "?" + parts.join("&") : "";
}

class Dedup {
  private inflight = new Map<string, Promise<any>>();

  run<T>(key: string, fn: () => Promise<T>): Promise<T> {
    const existing = this.inflight.get(key);
    if (existing) {
      return existing as Promise<T>;
    }
    const p = fn().finally(() => this.inflight.delete(key));
    this.inflight.set(key, p);
    return p;
  }
}

export class ApiClient {
  private dedup = new Dedup();

  constructor(public base: string, private fetchFn: FetchLike = fetch.bind(globalThis)) {}

  private get(path: string): Promise<any> {
    return this.dedup.run(path, async () => checked(await this.fetchFn(this.base + path)));
  }

  meta(): Promise<MetaPayload> {
    return this.get("/v1/meta");
  }

  recordsPage(params: {
    from?: string;
    to?: string;
    instanceTypes?: string;
    regions?: string;
    azs?: string;
    metrics?: string;
    pageSize?: number;
    cursor?: string;
  }): Promise<RecordsPage> {
    return this.get("/v1/records" + query(params));
  }

  async allRecords(params: {
    from?: string;
    to?: string;
    instanceTypes?: string;
    regions?: string;
    azs?: string;
    metrics?: string;
  }): Promise<RecordRow[]> {
    const rows: RecordRow[] = [];
    let cursor: string | undefined;
    do {
      const page = await this.recordsPage({ ...params, pageSize: 10000, cursor });
      rows.push(...page.records);
      cursor = page.nextCursor ?? undefined;
    } while (cursor);
    return rows;
  }

  heatmap(rows: string, cols: string, metric: string): Promise<HeatmapPayload> {
    return this.get("/v1/analysis/heatmap" + query({ rows, cols, metric }));
  }

  distribution(metric: string): Promise<DistributionPayload> {
    return this.get("/v1/analysis/distribution" + query({ metric }));
  }

  frequency(metric: string): Promise<{ gapsHours: number[]; medianHours: number | null }> {
    return this.get("/v1/analysis/frequency" + query({ metric }));
  }

  predict(instance: string, az: string): Promise<PredictPayload> {
    return this.get("/v1/predict" + query({ instance, az }));
  }
}

export class VendorClient {
  private dedup = new Dedup();

  constructor(public base: string, private fetchFn: FetchLike = fetch.bind(globalThis)) {}

  async placementScore(
    account: string,
    instanceTypes: string[],
    regions: string[],
    targetCapacity: number,
  ): Promise<PlacementResult[]> {
    const resp = await this.fetchFn(this.base + "/v1/placement-score", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ account, instanceTypes, regions, targetCapacity, singleAz: true }),
    });
    const body = await checked(resp);
    return body.results;
  }

  budget(account: string): Promise<BudgetState> {
    return this.dedup.run("budget:" + account, async () =>
      checked(await this.fetchFn(this.base + "/v1/budget" + query({ account }))),
    );
  }
}
