/** Browser bootstrap: wires the client and renderer into the page.
 *
 * The page is stateless beyond the last /state payload; reloading
 * reproduces the identical view.  Drag corrections edit the two coordinates
 * of the projection being dragged; the numeric editor is always available.
 */

import { ReviewClient, ServiceError } from "./client.js";
import { PANEL_H, PANEL_W, describeAlternatives, renderFrame } from "./render.js";
import { fromScreen, planeAxes } from "./projection.js";
import type { StatePayload, Vec3 } from "./types.js";

const client = new ReviewClient(
  (window as any).SEAMTRACK_SERVICE ?? "http://127.0.0.1:8572");

let current: StatePayload | null = null;
let edited: Vec3[] | null = null;
let dragging: { object: number; plane: string } | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function banner(message: string) {
  const b = el<HTMLDivElement>("banner");
  b.textContent = message;
  b.style.display = message ? "block" : "none";
}

function setControlsEnabled(enabled: boolean) {
  for (const id of ["accept", "correct", "reloadBtn"]) {
    (el<HTMLButtonElement>(id)).disabled = !enabled;
  }
}

function renderEditor(positions: Vec3[], labels: string[]) {
  const rows = positions.map((p, i) =>
    `<tr><td>${labels[i]}</td>` + p.map((v, a) =>
      `<td><input data-object="${i}" data-axis="${a}" type="number" step="0.1" value="${v.toFixed(3)}"/></td>`
    ).join("") + "</tr>").join("");
  el<HTMLTableElement>("editor").innerHTML =
    `<tr><th>object</th><th>x</th><th>y</th><th>z</th></tr>${rows}`;
  el<HTMLTableElement>("editor").querySelectorAll("input").forEach((input) => {
    input.addEventListener("change", () => {
      if (!edited) return;
      const i = Number(input.dataset.object);
      const a = Number(input.dataset.axis);
      edited[i][a] = Number(input.value);
    });
  });
}

function attachDrag(panelHost: HTMLDivElement) {
  panelHost.querySelectorAll("svg").forEach((svg) => {
    const plane = svg.dataset.plane!;
    svg.addEventListener("mousedown", (ev) => {
      const target = ev.target as SVGElement;
      if (target.classList.contains("object")) {
        dragging = { object: Number(target.dataset.object), plane };
      }
    });
    svg.addEventListener("mousemove", (ev) => {
      if (!dragging || dragging.plane !== plane || !edited || !current) return;
      const rect = svg.getBoundingClientRect();
      const render = renderFrame(current);
      const panel = render.panels.find((p) => p.plane === plane)!;
      const [wx, wy] = fromScreen(
        [ev.clientX - rect.left, ev.clientY - rect.top], panel.transform);
      const [ax, ay] = planeAxes(plane as any);
      edited[dragging.object][ax] = wx;
      edited[dragging.object][ay] = wy;
      renderEditor(edited, current.graph.labels);
    });
    svg.addEventListener("mouseup", () => { dragging = null; });
  });
}

function show(payload: StatePayload) {
  current = payload;
  el<HTMLSpanElement>("frameLabel").textContent =
    payload.done ? `done (${payload.frame_count} frames)`
                 : `frame ${payload.frame} / ${payload.frame_count - 1}`;
  const host = el<HTMLDivElement>("panels");
  if (payload.done) {
    host.innerHTML = "<p>Sequence finished.</p>";
    setControlsEnabled(false);
    return;
  }
  const render = renderFrame(payload);
  host.innerHTML = render.panels.map((p) => p.svg).join("\n");
  attachDrag(host);
  edited = payload.proposal!.positions.map((p) => [...p] as Vec3);
  renderEditor(edited, payload.graph.labels);
  const list = el<HTMLUListElement>("alternatives");
  list.innerHTML = describeAlternatives(payload).map(
    (text, k) => `<li><button data-alt="${k}">${text}</button></li>`).join("");
  list.querySelectorAll("button").forEach((btn) => {
    btn.addEventListener("click", async () => {
      try {
        banner("");
        show(await client.switchHypothesis(payload, Number(btn.dataset.alt)));
      } catch (err) {
        banner(String(err));
      }
    });
  });
  setControlsEnabled(true);
}

async function reload() {
  try {
    banner("");
    show(await client.state());
  } catch (err) {
    banner(`cannot reach service: ${err instanceof Error ? err.message : err}`);
  }
}

async function guard(action: () => Promise<StatePayload>) {
  setControlsEnabled(false);
  try {
    banner("");
    show(await action());
  } catch (err) {
    if (err instanceof ServiceError) {
      banner(`request failed (${err.status}): ${err.message} — retry?`);
    } else {
      banner(String(err));
    }
    setControlsEnabled(true);
  }
}

export function boot() {
  el<HTMLButtonElement>("accept").addEventListener("click",
    () => guard(() => client.accept()));
  el<HTMLButtonElement>("correct").addEventListener("click",
    () => guard(() => client.correct(edited!)));
  el<HTMLButtonElement>("reloadBtn").addEventListener("click", reload);
  el<HTMLDivElement>("panels").style.minHeight = `${PANEL_H}px`;
  el<HTMLDivElement>("panels").style.minWidth = `${PANEL_W}px`;
  reload();
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", boot);
}
