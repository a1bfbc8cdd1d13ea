/** JSON payload shapes served by the review service. */

export type Vec3 = [number, number, number];

export interface GraphPayload {
  labels: string[];
  edges: [number, number][];
}

export interface ProposalPayload {
  positions: Vec3[];
  assignment: number[];      // 0 = gated (interpolated), j>0 = detection j
  path_cost: number;
  interpolated: number[];
}

export interface AlternativePayload {
  positions: Vec3[];
  assignment: number[];
  model_cost: number;
  unary_cost: number;
}

export interface StatePayload {
  frame: number;
  frame_count: number;
  done: boolean;
  threshold: number;
  graph: GraphPayload;
  prev: { frame: number; positions: Vec3[] };
  detections?: Vec3[];
  proposal?: ProposalPayload;
  alternatives?: AlternativePayload[];
}

export interface HistoryPayload {
  states: { frame: number; positions: Vec3[] }[];
  events: { frame: number; kind: string; detail: string }[];
}
