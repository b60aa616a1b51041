/* Typed client for the annotation service. Every numeric value shown in the
 * UI originates from one of these responses. */

export interface ClassInfo {
  class_id: string;
  annotation_count: number;
  sample_count: number;
  slant_deg: number;
}

export type LineType = "baseline" | "xline" | "ascender" | "capline" | "descender";
export type Kind = "min" | "max";

export interface Annotation {
  s: number;
  type: LineType;
  kind: Kind;
}

export interface MetricLinesPayload {
  lines: Record<string, number | null>;
  heights: Record<string, number | null>;
  slant_deg: number;
  width: number;
}

export interface LocatedPointPayload {
  s: number;
  type: LineType;
  kind: Kind;
  x: number;
  y: number;
  boundary: boolean;
  failed: boolean;
}

export interface CurvePayload {
  class_id: string;
  s: number[];
  points: [number, number][];
  annotations: Annotation[];
  metric_lines: MetricLinesPayload | null;
  located: LocatedPointPayload[];
  width: number;
  slant_deg: number;
  revision: number;
  sample_count: number;
  annotation_count?: number;
}

export interface SnapRequest {
  kind: Kind;
  s_guess?: number;
  point?: [number, number];
}

export interface SnapResponse {
  found: boolean;
  s?: number;
  x?: number;
  y?: number;
  boundary?: boolean;
  s_guess: number;
  nearest?: { s: number; kind: Kind | null } | null;
}

export interface SavedModelPayload {
  class_id: string;
  sample_count: number;
  slant_deg: number;
  annotations: Annotation[];
  width: number;
  revision: number;
}

export interface PreviewReport {
  label: string | null;
  steps: number;
  points: LocatedPointPayload[];
  metrics: MetricLinesPayload;
  polyline: [number, number][];
}

export interface PreviewPayload {
  class_id: string;
  reports: PreviewReport[];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await fetch(this.base + path, init);
    const payload = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, (payload && payload.error) || `HTTP ${resp.status}`);
    }
    return payload as T;
  }

  listClasses(): Promise<ClassInfo[]> {
    return this.request("GET", "/classes");
  }

  curve(classId: string, samples = 256): Promise<CurvePayload> {
    return this.request("GET", `/classes/${encodeURIComponent(classId)}/curve?samples=${samples}`);
  }

  snap(classId: string, req: SnapRequest): Promise<SnapResponse> {
    return this.request("POST", `/classes/${encodeURIComponent(classId)}/snap`, req);
  }

  saveAnnotations(
    classId: string,
    annotations: Annotation[],
    slantDeg: number,
    revision?: number,
  ): Promise<SavedModelPayload> {
    const body: Record<string, unknown> = { annotations, slant_deg: slantDeg };
    if (revision !== undefined) {
      body.revision = revision;
    }
    return this.request("PUT", `/classes/${encodeURIComponent(classId)}/annotations`, body);
  }

  preview(classId: string, ink: unknown, steps: number): Promise<PreviewPayload> {
    return this.request("POST", `/classes/${encodeURIComponent(classId)}/preview`, { ink, steps });
  }
}
