/* The drawable scene, in world (page) coordinates.
 *
 * Everything here is assembled by reference or verbatim copy from service
 * payloads held in the state; the screen mapping is applied only at draw
 * time. Tests assert this provenance. */

import { Kind, LineType } from "./api.js";
import { CanvasState } from "./state.js";

export interface Marker {
  x: number;
  y: number;
  s: number;
  type: LineType;
  kind: Kind;
  pending: boolean;
  failed: boolean;
}

export interface GuideLine {
  type: string;
  y: number;
}

export interface Scene {
  polyline: [number, number][];
  markers: Marker[];
  guideLines: GuideLine[];
  previewPolylines: [number, number][][];
  previewMarkers: Marker[];
  previewGuideLines: GuideLine[];
  widthReadout: number | null;
  slantDeg: number;
}

export function buildScene(state: CanvasState): Scene {
  const scene: Scene = {
    polyline: [],
    markers: [],
    guideLines: [],
    previewPolylines: [],
    previewMarkers: [],
    previewGuideLines: [],
    widthReadout: state.widthReadout,
    slantDeg: state.slantDeg,
  };
  const curve = state.curve;
  if (!curve) {
    return scene;
  }
  scene.polyline = curve.points;
  for (const p of curve.located) {
    scene.markers.push({
      x: p.x, y: p.y, s: p.s, type: p.type, kind: p.kind,
      pending: false, failed: p.failed,
    });
  }
  for (const p of state.pending) {
    scene.markers.push({
      x: p.x, y: p.y, s: p.s, type: p.type, kind: p.kind,
      pending: true, failed: false,
    });
  }
  if (curve.metric_lines) {
    for (const [type, y] of Object.entries(curve.metric_lines.lines)) {
      if (y !== null) {
        scene.guideLines.push({ type, y });
      }
    }
  }
  for (const report of state.previewReports ?? []) {
    scene.previewPolylines.push(report.polyline);
    for (const p of report.points) {
      scene.previewMarkers.push({
        x: p.x, y: p.y, s: p.s, type: p.type, kind: p.kind,
        pending: false, failed: p.failed,
      });
    }
    for (const [type, y] of Object.entries(report.metrics.lines)) {
      if (y !== null) {
        scene.previewGuideLines.push({ type, y });
      }
    }
  }
  return scene;
}

export function allScenePoints(scene: Scene): [number, number][] {
  const pts: [number, number][] = [];
  pts.push(...scene.polyline);
  for (const group of scene.previewPolylines) {
    pts.push(...group);
  }
  for (const m of scene.markers.concat(scene.previewMarkers)) {
    pts.push([m.x, m.y]);
  }
  return pts;
}
