/* Canvas state and its pure transitions.
 *
 * The invariant maintained everywhere: numeric fields (marker positions,
 * arc lengths, line heights, widths) are copied verbatim from service
 * responses. The UI composes and displays them but never computes curve
 * geometry itself. */

import {
  Annotation,
  CurvePayload,
  Kind,
  LineType,
  PreviewReport,
  SavedModelPayload,
  SnapResponse,
} from "./api.js";

export const SLANT_LIMIT = 88; // spinner stays strictly inside (-89, 89)

export interface PendingAnnotation extends Annotation {
  x: number; // page-space position, from the snap response
  y: number;
  boundary: boolean;
}

export interface CanvasState {
  classId: string | null;
  curve: CurvePayload | null;
  pending: PendingAnnotation[];
  slantDeg: number;
  widthReadout: number | null;
  previewReports: PreviewReport[] | null;
  error: string | null;
  toast: string | null;
  revision: number | null;
}

export function initialState(): CanvasState {
  return {
    classId: null,
    curve: null,
    pending: [],
    slantDeg: 0,
    widthReadout: null,
    previewReports: null,
    error: null,
    toast: null,
    revision: null,
  };
}

export function curveLoaded(state: CanvasState, classId: string, payload: CurvePayload): CanvasState {
  return {
    ...state,
    classId,
    curve: payload,
    pending: [],
    slantDeg: payload.slant_deg,
    widthReadout: payload.width,
    previewReports: null,
    error: null,
    toast: null,
    revision: payload.revision,
  };
}

export function curveFailed(state: CanvasState, message: string): CanvasState {
  // no stale canvas: the curve is dropped along with everything derived from it
  return {
    ...initialState(),
    classId: state.classId,
    error: message,
  };
}

export function snapApplied(
  state: CanvasState,
  type: LineType,
  kind: Kind,
  resp: SnapResponse,
): CanvasState {
  if (!resp.found || resp.s === undefined || resp.x === undefined || resp.y === undefined) {
    return { ...state, toast: "no matching extremum near that point" };
  }
  const pending = state.pending.concat([{
    s: resp.s,
    type,
    kind,
    x: resp.x,
    y: resp.y,
    boundary: Boolean(resp.boundary),
  }]);
  return { ...state, pending, toast: null };
}

export function undoPending(state: CanvasState): CanvasState {
  if (state.pending.length === 0) {
    return state;
  }
  return { ...state, pending: state.pending.slice(0, -1) };
}

export function adjustSlant(state: CanvasState, deltaDeg: number): CanvasState {
  const stepped = state.slantDeg + Math.round(deltaDeg); // 1 degree steps
  const clamped = Math.max(-SLANT_LIMIT, Math.min(SLANT_LIMIT, stepped));
  return { ...state, slantDeg: clamped };
}

export function annotationsForSave(state: CanvasState): Annotation[] {
  const existing = state.curve ? state.curve.annotations : [];
  return existing
    .map(({ s, type, kind }) => ({ s, type, kind }))
    .concat(state.pending.map(({ s, type, kind }) => ({ s, type, kind })));
}

export function saveApplied(state: CanvasState, payload: SavedModelPayload): CanvasState {
  // the width readout must be the server's recomputed value, never a local one
  return {
    ...state,
    widthReadout: payload.width,
    slantDeg: payload.slant_deg,
    revision: payload.revision,
    toast: null,
  };
}

export function previewLoaded(state: CanvasState, reports: PreviewReport[]): CanvasState {
  return { ...state, previewReports: reports, toast: null };
}

export function toastCleared(state: CanvasState): CanvasState {
  return { ...state, toast: null };
}
