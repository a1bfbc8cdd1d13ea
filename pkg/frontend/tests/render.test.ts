import { describe, expect, it } from "vitest";

import { describeAlternatives, renderFrame } from "../src/render.js";
import type { StatePayload, Vec3 } from "../src/types.js";

function payload(interpolated: number[]): StatePayload {
  const positions: Vec3[] = [[0, 0, 0], [5, 0, 0], [5, 5, 0], [0, 5, 0]];
  return {
    frame: 1,
    frame_count: 10,
    done: false,
    threshold: 7.5,
    graph: {
      labels: ["H0L", "H0R", "TL", "TR"],
      edges: [[0, 1], [2, 3], [0, 2], [1, 3], [0, 3], [1, 2]],
    },
    prev: { frame: 0, positions },
    detections: positions.filter((_, i) => !interpolated.includes(i)),
    proposal: {
      positions,
      assignment: positions.map((_, i) => (interpolated.includes(i) ? 0 : i + 1)),
      path_cost: 1.25,
      interpolated,
    },
    alternatives: [
      { positions, assignment: [1, 2, 3, 4], model_cost: 1.0, unary_cost: 0.5 },
      { positions, assignment: [0, 2, 3, 4], model_cost: 2.5, unary_cost: 1.5 },
    ],
  };
}

describe("renderFrame", () => {
  it("renders three projections", () => {
    const r = renderFrame(payload([]));
    expect(r.panels.map((p) => p.plane)).toEqual(["xy", "xz", "yz"]);
    for (const panel of r.panels) {
      expect(panel.svg).toContain("<svg");
      expect(panel.svg).toContain("class=\"object\"");
      expect(panel.svg).toContain("class=\"detection\"");
    }
  });

  it("fully detected frames carry no interpolation highlight", () => {
    const r = renderFrame(payload([]));
    expect(r.highlightCount).toBe(0);
    for (const panel of r.panels) {
      expect(panel.svg).not.toContain("gated-highlight");
    }
  });

  it("one gated object yields exactly one highlight per panel", () => {
    const r = renderFrame(payload([2]));
    expect(r.highlightCount).toBe(1);
    for (const panel of r.panels) {
      const hits = panel.svg.match(/gated-highlight/g) ?? [];
      expect(hits.length).toBe(1);
      expect(panel.svg).toContain('data-object="2"');
    }
  });

  it("snapshot of a fixture payload is stable", () => {
    const r = renderFrame(payload([1]));
    expect(r.panels[0].svg).toMatchSnapshot();
  });

  it("malformed payloads raise instead of rendering garbage", () => {
    expect(() => renderFrame({} as StatePayload)).toThrow(/malformed/);
  });

  it("alternatives are described cheapest-first as served", () => {
    const lines = describeAlternatives(payload([]));
    expect(lines.length).toBe(2);
    expect(lines[0]).toContain("#0 cost 1.000");
    expect(lines[1]).toContain("1 gated");
  });
});
