/** Orthogonal 2-D projections of the 3-D scene and viewport fitting. */

import type { Vec3 } from "./types.js";

export type Plane = "xy" | "xz" | "yz";

export const PLANES: Plane[] = ["xy", "xz", "yz"];

const AXES: Record<Plane, [number, number]> = {
  xy: [0, 1],
  xz: [0, 2],
  yz: [1, 2],
};

export function project(p: Vec3, plane: Plane): [number, number] {
  const [a, b] = AXES[plane];
  return [p[a], p[b]];
}

/** Which 3-D axes a plane displays (horizontal, vertical). */
export function planeAxes(plane: Plane): [number, number] {
  return AXES[plane];
}

export interface ViewTransform {
  scale: number;
  ox: number;
  oy: number;
  width: number;
  height: number;
}

/** Fit all points into a width x height viewport with a margin, preserving
 * aspect ratio.  Pure: identical inputs give the identical transform. */
export function fitViewport(points: [number, number][], width: number,
                            height: number, margin = 24): ViewTransform {
  let xmin = Infinity, xmax = -Infinity, ymin = Infinity, ymax = -Infinity;
  for (const [x, y] of points) {
    xmin = Math.min(xmin, x); xmax = Math.max(xmax, x);
    ymin = Math.min(ymin, y); ymax = Math.max(ymax, y);
  }
  if (!isFinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
  const spanX = Math.max(xmax - xmin, 1e-9);
  const spanY = Math.max(ymax - ymin, 1e-9);
  const scale = Math.min((width - 2 * margin) / spanX,
                         (height - 2 * margin) / spanY);
  // center the content
  const ox = (width - scale * (xmin + xmax)) / 2;
  const oy = (height - scale * (ymin + ymax)) / 2;
  return { scale, ox, oy, width, height };
}

export function toScreen(p: [number, number], t: ViewTransform): [number, number] {
  return [t.ox + t.scale * p[0], t.oy + t.scale * p[1]];
}

export function fromScreen(s: [number, number], t: ViewTransform): [number, number] {
  return [(s[0] - t.ox) / t.scale, (s[1] - t.oy) / t.scale];
}
