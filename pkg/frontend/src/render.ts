/** Pure SVG rendering of a frame payload.
 *
 * Produces one panel per orthogonal projection: detections as hollow dots,
 * proposed positions as filled dots joined by graph edges, and gated
 * (interpolated) objects highlighted with a distinct ring.  DOM-free so the
 * output is directly testable.
 */

import { PLANES, Plane, ViewTransform, fitViewport, project, toScreen } from "./projection.js";
import type { StatePayload, Vec3 } from "./types.js";

export const PANEL_W = 360;
export const PANEL_H = 320;

const PROPOSAL_COLOR = "#1f77b4";
const DETECTION_COLOR = "#999999";
const EDGE_COLOR = "#7fb3d5";
const HIGHLIGHT_COLOR = "#d62728";

export interface PanelRender {
  plane: Plane;
  svg: string;
  transform: ViewTransform;
}

export interface FrameRender {
  panels: PanelRender[];
  highlightCount: number;
}

function fmt(x: number): string {
  return x.toFixed(2);
}

export function renderPanel(payload: StatePayload, plane: Plane): PanelRender {
  const dets = payload.detections ?? [];
  const proposal = payload.proposal;
  const all2d: [number, number][] = [];
  for (const p of dets) all2d.push(project(p, plane));
  for (const p of payload.prev.positions) all2d.push(project(p, plane));
  if (proposal) for (const p of proposal.positions) all2d.push(project(p, plane));
  const t = fitViewport(all2d, PANEL_W, PANEL_H);

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${PANEL_W}" height="${PANEL_H}" data-plane="${plane}">`);
  parts.push(`<rect width="${PANEL_W}" height="${PANEL_H}" fill="#fcfcfc" stroke="#ccc"/>`);
  parts.push(`<text x="8" y="16" font-family="sans-serif" font-size="12">${plane.toUpperCase()}</text>`);

  if (proposal) {
    for (const [u, v] of payload.graph.edges) {
      const a = toScreen(project(proposal.positions[u], plane), t);
      const b = toScreen(project(proposal.positions[v], plane), t);
      parts.push(`<line x1="${fmt(a[0])}" y1="${fmt(a[1])}" x2="${fmt(b[0])}" y2="${fmt(b[1])}" stroke="${EDGE_COLOR}" stroke-width="1"/>`);
    }
  }
  dets.forEach((p, j) => {
    const s = toScreen(project(p, plane), t);
    parts.push(`<circle class="detection" data-det="${j}" cx="${fmt(s[0])}" cy="${fmt(s[1])}" r="3.5" fill="none" stroke="${DETECTION_COLOR}"/>`);
  });
  if (proposal) {
    const gated = new Set(proposal.interpolated);
    proposal.positions.forEach((p, i) => {
      const s = toScreen(project(p, plane), t);
      if (gated.has(i)) {
        parts.push(`<circle class="gated-highlight" data-object="${i}" cx="${fmt(s[0])}" cy="${fmt(s[1])}" r="7" fill="none" stroke="${HIGHLIGHT_COLOR}" stroke-width="2"/>`);
      }
      parts.push(`<circle class="object" data-object="${i}" cx="${fmt(s[0])}" cy="${fmt(s[1])}" r="3" fill="${PROPOSAL_COLOR}"/>`);
      parts.push(`<text x="${fmt(s[0] + 5)}" y="${fmt(s[1] - 5)}" font-family="sans-serif" font-size="9" fill="#333">${payload.graph.labels[i]}</text>`);
    });
  }
  parts.push("</svg>");
  return { plane, svg: parts.join(""), transform: t };
}

export function renderFrame(payload: StatePayload): FrameRender {
  if (!payload || !payload.graph || !payload.prev) {
    throw new Error("malformed state payload");
  }
  const panels = PLANES.map((plane) => renderPanel(payload, plane));
  const highlightCount = payload.proposal ? payload.proposal.interpolated.length : 0;
  return { panels, highlightCount };
}

/** Alternative list entries, cheapest first (as served). */
export function describeAlternatives(payload: StatePayload): string[] {
  return (payload.alternatives ?? []).map((alt, k) => {
    const gated = alt.assignment.filter((a) => a === 0).length;
    return `#${k} cost ${alt.model_cost.toFixed(3)} (unary ${alt.unary_cost.toFixed(3)}, ${gated} gated)`;
  });
}
