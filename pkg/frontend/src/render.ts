/* Canvas drawing. Pure consumer of a Scene and a ViewTransform. */

import { Scene } from "./scene.js";
import { ViewTransform } from "./view.js";

const LINE_COLORS: Record<string, string> = {
  baseline: "#d62728",
  xline: "#1f77b4",
  ascender: "#2ca02c",
  capline: "#9467bd",
  descender: "#8c564b",
};

function drawPolyline(ctx: CanvasRenderingContext2D, view: ViewTransform,
                      pts: [number, number][], color: string, width: number) {
  if (pts.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  const [sx, sy] = view.toScreen(pts[0][0], pts[0][1]);
  ctx.moveTo(sx, sy);
  for (let i = 1; i < pts.length; i++) {
    const [x, y] = view.toScreen(pts[i][0], pts[i][1]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
}

export function draw(ctx: CanvasRenderingContext2D, scene: Scene, view: ViewTransform,
                     width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  drawPolyline(ctx, view, scene.polyline, "#222222", 2);
  for (const pts of scene.previewPolylines) {
    drawPolyline(ctx, view, pts, "#999999", 1.2);
  }
  for (const line of scene.guideLines.concat(scene.previewGuideLines)) {
    const color = LINE_COLORS[line.type] ?? "#777777";
    const [, sy] = view.toScreen(0, line.y);
    ctx.strokeStyle = color;
    ctx.lineWidth = 1;
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(0, sy);
    ctx.lineTo(width, sy);
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = color;
    ctx.font = "11px sans-serif";
    ctx.fillText(line.type, 4, sy - 3);
  }
  for (const m of scene.markers.concat(scene.previewMarkers)) {
    const [sx, sy] = view.toScreen(m.x, m.y);
    const color = LINE_COLORS[m.type] ?? "#777777";
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    if (m.failed) {
      ctx.moveTo(sx - 5, sy - 5);
      ctx.lineTo(sx + 5, sy + 5);
      ctx.moveTo(sx - 5, sy + 5);
      ctx.lineTo(sx + 5, sy - 5);
    } else {
      ctx.arc(sx, sy, m.pending ? 6 : 4, 0, 2 * Math.PI);
    }
    ctx.stroke();
    if (m.pending) {
      ctx.fillStyle = color;
      ctx.font = "10px sans-serif";
      ctx.fillText(`${m.type}/${m.kind}`, sx + 8, sy + 3);
    }
  }
}
