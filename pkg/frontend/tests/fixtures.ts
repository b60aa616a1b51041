/* Canned service payloads and a fetch interceptor for the UI tests. */

import { CurvePayload, PreviewPayload, SavedModelPayload, SnapResponse } from "../src/api.js";

export interface RecordedCall {
  method: string;
  url: string;
  body: unknown;
}

type Handler = (call: RecordedCall) => { status?: number; payload: unknown };

export function interceptFetch(routes: Array<[RegExp | string, Handler]>): RecordedCall[] {
  const calls: RecordedCall[] = [];
  globalThis.fetch = (async (url: unknown, init?: RequestInit) => {
    const call: RecordedCall = {
      method: init?.method ?? "GET",
      url: String(url),
      body: init?.body ? JSON.parse(init.body as string) : undefined,
    };
    calls.push(call);
    for (const [pattern, handler] of routes) {
      const hit = typeof pattern === "string" ? call.url === pattern : pattern.test(call.url);
      if (hit) {
        const { status = 200, payload } = handler(call);
        return new Response(JSON.stringify(payload), {
          status,
          headers: { "Content-Type": "application/json" },
        });
      }
    }
    return new Response(JSON.stringify({ error: `no route for ${call.url}` }), { status: 404 });
  }) as typeof fetch;
  return calls;
}

export function failingFetch(): void {
  globalThis.fetch = (async () => {
    throw new TypeError("network down");
  }) as typeof fetch;
}

/* A dipping curve: minimum of y at s = 0.5, world point (0.52, -1.3). */
export function curveFixture(): CurvePayload {
  return {
    class_id: "eta",
    s: [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
    points: [
      [0.0, 0.9], [0.11, 0.4], [0.2, -0.2], [0.31, -0.8], [0.42, -1.15],
      [0.52, -1.3], [0.63, -1.1], [0.71, -0.5], [0.82, 0.2], [0.9, 0.62],
      [1.0, 0.9],
    ],
    annotations: [{ s: 0.5, type: "baseline", kind: "min" }],
    metric_lines: {
      lines: { baseline: -1.3, xline: 0.9, ascender: null, capline: null, descender: null },
      heights: { x_height: 2.2, ascender_height: null, cap_height: null, descender_depth: null },
      slant_deg: 4.0,
      width: 1.7351,
    },
    located: [
      { s: 0.5, type: "baseline", kind: "min", x: 0.52, y: -1.3, boundary: false, failed: false },
    ],
    width: 1.7351,
    slant_deg: 4.0,
    revision: 3,
    sample_count: 12,
  };
}

export function snapFixture(): SnapResponse {
  return { found: true, s: 0.5, x: 0.52, y: -1.3, boundary: false, s_guess: 0.47 };
}

export function savedFixture(annotations: CurvePayload["annotations"], slant: number): SavedModelPayload {
  return {
    class_id: "eta",
    sample_count: 12,
    slant_deg: slant,
    annotations,
    width: 1.9012,
    revision: 4,
  };
}

export function previewFixture(): PreviewPayload {
  return {
    class_id: "eta",
    reports: [{
      label: "eta",
      steps: 3,
      points: [
        { s: 0.48, type: "baseline", kind: "min", x: 0.5, y: -1.27, boundary: false, failed: false },
      ],
      metrics: {
        lines: { baseline: -1.27, xline: null, ascender: null, capline: null, descender: null },
        heights: { x_height: null, ascender_height: null, cap_height: null, descender_depth: null },
        slant_deg: 4.0,
        width: 1.69,
      },
      polyline: [[0.0, 0.8], [0.5, -1.27], [1.0, 0.85]],
    }],
  };
}

/* Every number appearing anywhere in a JSON payload. */
export function collectNumbers(payload: unknown, out = new Set<number>()): Set<number> {
  if (typeof payload === "number") {
    out.add(payload);
  } else if (Array.isArray(payload)) {
    for (const item of payload) collectNumbers(item, out);
  } else if (payload && typeof payload === "object") {
    for (const value of Object.values(payload)) collectNumbers(value, out);
  }
  return out;
}
