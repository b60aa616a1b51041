/* World <-> screen mapping. The world frame is the service's page frame
 * (y up); the canvas y axis points down, so the transform flips y. */

export interface Box {
  xmin: number;
  xmax: number;
  ymin: number;
  ymax: number;
}

export class ViewTransform {
  readonly scale: number;
  readonly ox: number;
  readonly oy: number;

  constructor(world: Box, width: number, height: number, margin = 24) {
    const w = Math.max(world.xmax - world.xmin, 1e-9);
    const h = Math.max(world.ymax - world.ymin, 1e-9);
    this.scale = Math.min((width - 2 * margin) / w, (height - 2 * margin) / h);
    const cx = 0.5 * (world.xmin + world.xmax);
    const cy = 0.5 * (world.ymin + world.ymax);
    this.ox = width / 2 - this.scale * cx;
    this.oy = height / 2 + this.scale * cy;
  }

  toScreen(x: number, y: number): [number, number] {
    return [this.ox + this.scale * x, this.oy - this.scale * y];
  }

  toWorld(sx: number, sy: number): [number, number] {
    return [(sx - this.ox) / this.scale, (this.oy - sy) / this.scale];
  }
}

export function boundsOf(points: [number, number][]): Box {
  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (const [x, y] of points) {
    if (x < xmin) xmin = x;
    if (x > xmax) xmax = x;
    if (y < ymin) ymin = y;
    if (y > ymax) ymax = y;
  }
  return { xmin, xmax, ymin, ymax };
}
