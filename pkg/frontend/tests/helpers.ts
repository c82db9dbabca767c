import { readFileSync } from "node:fs";
import { join } from "node:path";

export function fixture<T = any>(name: string): T {
  return JSON.parse(readFileSync(join(__dirname, "..", "fixtures", name), "utf-8"));
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

type Route = (url: string, init?: RequestInit) => Response | undefined;

/** fetch stub driven by an ordered list of matchers; throws on unmatched URLs */
export function fakeFetch(routes: Route[]): {
  fetchFn: (url: string, init?: RequestInit) => Promise<Response>;
  calls: string[];
} {
  const calls: string[] = [];
  const fetchFn = async (url: string, init?: RequestInit) => {
    calls.push(url);
    for (const route of routes) {
      const resp = route(url, init);
      if (resp) {
        return resp;
      }
    }
    throw new Error(`unmatched fetch: ${url}`);
  };
  return { fetchFn, calls };
}
