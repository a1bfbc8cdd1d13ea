"""Deferred-decision tracking: commit each frame's update only after scoring
its consequences over N future frames.

Two regimes share the same expansion primitive (ranked assignments from the
gated cost matrix, completed by graphical interpolation, scored by the
association model, optionally pruned on body self-intersection):

* ``explicit`` grows the full tree, up to K children per node, and walks it
  depth-first with branch-and-bound on the accumulated path cost.
* ``kbest`` keeps a frontier of at most K nodes per depth, pooling all
  parents into one ranked-assignment call with their path costs as offsets.

Both regimes are deterministic and, at K=1, trace the identical greedy
chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from seamtrack.assignment import build_cost_matrix, k_best_of_k, murty_k_best
from seamtrack.core import DetectionSet, GateConfig, Hypothesis, InvalidConfigError, TrackState
from seamtrack.evaluation import PASS_THRESHOLD_UM, frame_passes
from seamtrack.geometry import segments_intersect
from seamtrack.interpolation import complete_state
from seamtrack.models import AssociationModel, edge_features, state_update_cost

REGIMES = ("explicit", "kbest")


@dataclass(frozen=True)
class SearchConfig:
    model: AssociationModel
    gates: GateConfig
    K: float = 1
    N: int = 1
    regime: str = "explicit"
    prune_intersections: bool = True

    def __post_init__(self):
        if not (self.K >= 1):
            raise InvalidConfigError("K must be >= 1")
        if not (isinstance(self.N, int) and self.N >= 1):
            raise InvalidConfigError("N must be an integer >= 1")
        if self.regime not in REGIMES:
            raise InvalidConfigError(f"regime must be one of {REGIMES}")


@dataclass
class FrameDiagnostics:
    """Structured per-frame search record."""

    frame_index: int
    nodes_expanded: int = 0
    hypotheses_generated: int = 0
    pruned_gate: int = 0            # ranked-assignment shortfall vs K (gating exhausted)
    pruned_intersection: int = 0
    pruned_bound: int = 0
    chosen_path_cost: float = math.inf
    chosen_assignment: Optional[np.ndarray] = None
    best_cost_by_depth: List[float] = field(default_factory=list)
    fallback: Optional[str] = None


@dataclass
class TrackEvent:
    frame_index: int
    kind: str                       # "reset" | "fallback"
    detail: str = ""


@dataclass
class TrackHistory:
    """Committed states (initial state first), error events, diagnostics."""

    states: List[TrackState]
    events: List[TrackEvent] = field(default_factory=list)
    diagnostics: List[FrameDiagnostics] = field(default_factory=list)

    @property
    def initial(self) -> TrackState:
        return self.states[0]

    @property
    def committed(self) -> List[TrackState]:
        return self.states[1:]


class _Node:
    __slots__ = ("state", "path_cost", "depth", "root_index", "assignment",
                 "unary", "cost")

    def __init__(self, state, path_cost, depth, root_index, assignment=None,
                 unary=0.0, cost=0.0):
        self.state = state
        self.path_cost = path_cost
        self.depth = depth
        self.root_index = root_index
        self.assignment = assignment
        self.unary = unary
        self.cost = cost


def _expand_candidates(prev_state: TrackState, detections: DetectionSet,
                       cfg: SearchConfig, path_cost: float, diag: FrameDiagnostics):
    """Rank-and-score the children of one node.

    Returns (alive, pruned) where each entry is (model_cost, assignment,
    completed_state, unary); alive excludes self-intersecting postures.
    Children are sorted by model cost with the assignment vector as a
    deterministic tiebreak.
    """
    C = build_cost_matrix(prev_state, detections, cfg.gates)
    ranked = murty_k_best(C, cfg.K)
    if math.isfinite(cfg.K):
        diag.pruned_gate += max(0, int(cfg.K) - len(ranked))
    prev_edges = edge_features(prev_state, cfg.model.graph)
    alive, pruned = [], []
    for r in ranked:
        completed = complete_state(prev_state, r.assignment, detections, cfg.model.graph)
        cost = state_update_cost(cfg.model, completed, prev_state, r.unary, prev_edges)
        entry = (cost, tuple(int(x) for x in r.assignment), completed, r.unary)
        if cfg.prune_intersections and segments_intersect(completed, cfg.model.graph):
            pruned.append(entry)
        else:
            alive.append(entry)
    diag.hypotheses_generated += len(ranked)
    diag.pruned_intersection += len(pruned)
    diag.nodes_expanded += 1
    alive.sort(key=lambda e: (e[0], e[1]))
    pruned.sort(key=lambda e: (e[0], e[1]))
    return alive, pruned


def expand_explicit(node: _Node, detections: DetectionSet, cfg: SearchConfig,
                    diag: Optional[FrameDiagnostics] = None) -> List[_Node]:
    """Children of one node for the explicit tree (<= K of them)."""
    diag = diag if diag is not None else FrameDiagnostics(detections.frame_index)
    alive, _ = _expand_candidates(node.state, detections, cfg, node.path_cost, diag)
    out = []
    for cost, phi, completed, unary in alive:
        out.append(_Node(completed, node.path_cost + cost, node.depth + 1,
                         node.root_index, np.asarray(phi, dtype=np.intp), unary, cost))
    return out


def expand_kbest_of_k(frontier: Sequence[_Node], detections: DetectionSet,
                      cfg: SearchConfig,
                      diag: Optional[FrameDiagnostics] = None) -> List[_Node]:
    """One frontier step of the pooled regime (<= K children total)."""
    if not frontier:
        raise InvalidConfigError("frontier must be nonempty")
    diag = diag if diag is not None else FrameDiagnostics(detections.frame_index)
    parents = [(build_cost_matrix(f.state, detections, cfg.gates), f.path_cost)
               for f in frontier]
    ranked = k_best_of_k(parents, cfg.K)
    if math.isfinite(cfg.K):
        diag.pruned_gate += max(0, int(cfg.K) - len(ranked))
    prev_edges = [None] * len(frontier)
    children = []
    for r in ranked:
        parent = frontier[r.parent_index]
        if prev_edges[r.parent_index] is None:
            prev_edges[r.parent_index] = edge_features(parent.state, cfg.model.graph)
        completed = complete_state(parent.state, r.assignment, detections,
                                   cfg.model.graph)
        cost = state_update_cost(cfg.model, completed, parent.state, r.unary,
                                 prev_edges[r.parent_index])
        if cfg.prune_intersections and segments_intersect(completed, cfg.model.graph):
            diag.pruned_intersection += 1
            continue
        root = parent.root_index
        children.append(_Node(completed, parent.path_cost + cost, parent.depth + 1,
                              root, np.asarray(r.assignment, dtype=np.intp),
                              r.unary, cost))
    diag.hypotheses_generated += len(ranked)
    diag.nodes_expanded += len(frontier)
    children.sort(key=lambda c: (c.path_cost, tuple(int(x) for x in c.assignment)))
    return children


def _commit(diag: FrameDiagnostics, root_entry, path_cost: float):
    cost, phi, completed, unary = root_entry
    diag.chosen_path_cost = path_cost
    diag.chosen_assignment = np.asarray(phi, dtype=np.intp)
    return completed, diag


def step(prev: TrackState, future_detections: Sequence[DetectionSet],
         cfg: SearchConfig) -> Tuple[TrackState, FrameDiagnostics]:
    """Commit the current frame's update that minimizes the N-frame path cost.

    ``future_detections[0]`` is the frame being committed; deeper entries
    only inform the decision.  N is truncated near the sequence end.
    """
    if not future_detections:
        raise ValueError("need at least one detection set")
    n_eff = min(cfg.N, len(future_detections))
    diag = FrameDiagnostics(frame_index=future_detections[0].frame_index)

    roots_alive, roots_pruned = _expand_candidates(prev, future_detections[0], cfg,
                                                   0.0, diag)
    if not roots_alive:
        # every first-frame hypothesis is geometrically invalid: take the
        # cheapest anyway and flag the frame
        diag.fallback = "all-depth1-pruned"
        best = roots_pruned[0]
        return _commit(diag, best, best[0])

    diag.best_cost_by_depth = [roots_alive[0][0]]
    if n_eff == 1:
        best = roots_alive[0]
        return _commit(diag, best, best[0])

    if cfg.regime == "explicit":
        return _step_explicit(roots_alive, future_detections, n_eff, cfg, diag)
    return _step_kbest(roots_alive, future_detections, n_eff, cfg, diag)


def _step_explicit(roots, future, n_eff, cfg, diag):
    """Exact minimum over the full K-ary tree.

    Equivalent to the depth-first walk with incumbent pruning, implemented
    as a depth-layered sweep: identical completed states reached at the same
    depth are merged keeping the cheapest path (future cost depends only on
    the state, so the merge is exact), and nodes at or above the incumbent
    complete-path cost are dropped.
    """
    incumbent = math.inf
    best_root_idx: Optional[int] = None
    best_by_depth = [roots[0][0]]

    layer = {}
    for idx, (cost, phi, completed, unary) in enumerate(roots):
        key = completed.positions.tobytes()
        if key not in layer or cost < layer[key][0]:
            layer[key] = (cost, idx, completed)
    for depth in range(1, n_eff):
        nxt = {}
        for cost, idx, state in sorted(layer.values(), key=lambda e: (e[0], e[1])):
            if cost >= incumbent:
                diag.pruned_bound += 1
                continue
            alive, _ = _expand_candidates(state, future[depth], cfg, cost, diag)
            for ccost, phi, completed, unary in alive:
                child_path = cost + ccost
                if child_path >= incumbent:
                    diag.pruned_bound += 1
                    continue
                if depth + 1 == n_eff:
                    incumbent = child_path
                    best_root_idx = idx
                    continue
                key = completed.positions.tobytes()
                if key not in nxt or child_path < nxt[key][0]:
                    nxt[key] = (child_path, idx, completed)
        layer = nxt
        if layer:
            best_by_depth.append(min(e[0] for e in layer.values()))
        if not layer:
            break

    diag.best_cost_by_depth = best_by_depth
    if best_root_idx is None:
        # lookahead dead-ended everywhere (all deeper postures pruned)
        diag.fallback = "lookahead-dead-end"
        best = roots[0]
        return _commit(diag, best, best[0])
    return _commit(diag, roots[best_root_idx], incumbent)


def _step_kbest(roots, future, n_eff, cfg, diag):
    frontier = [_Node(completed, cost, 1, idx, np.asarray(phi, dtype=np.intp), unary, cost)
                for idx, (cost, phi, completed, unary) in enumerate(roots)]
    # the frontier is capped at K: roots already number <= K
    best_by_depth = [frontier[0].path_cost]
    for depth in range(1, n_eff):
        children = expand_kbest_of_k(frontier, future[depth], cfg, diag)
        if not children:
            diag.fallback = "lookahead-dead-end"
            break
        frontier = children
        best_by_depth.append(frontier[0].path_cost)
    diag.best_cost_by_depth = best_by_depth
    best = min(frontier, key=lambda c: (c.path_cost,
                                        tuple(int(x) for x in c.assignment)))
    return _commit(diag, roots[best.root_index], best.path_cost)


def first_frame_hypotheses(prev: TrackState, detections: DetectionSet,
                           cfg: SearchConfig) -> List[Hypothesis]:
    """The scored depth-1 candidates, cheapest first (for review tooling)."""
    diag = FrameDiagnostics(frame_index=detections.frame_index)
    alive, pruned = _expand_candidates(prev, detections, cfg, 0.0, diag)
    out = []
    for cost, phi, completed, unary in alive + pruned:
        out.append(Hypothesis(np.asarray(phi, dtype=np.intp), completed,
                              unary_cost=unary, model_cost=cost,
                              cumulative_cost=cost))
    out.sort(key=lambda h: (h.model_cost, tuple(int(x) for x in h.assignment)))
    return out


def track_sequence(initial: TrackState, detections: Sequence[DetectionSet],
                   cfg: SearchConfig,
                   corrections: Optional[Sequence[TrackState]] = None,
                   threshold: float = PASS_THRESHOLD_UM) -> TrackHistory:
    """Track a full sequence, optionally with the correction protocol.

    With a ``corrections`` oracle (one annotation per detection frame), any
    frame failing the pass test is recorded as an error and the working
    state resets to the oracle before the next frame; the history keeps the
    tracker's own committed state for every frame.
    """
    if not detections:
        raise ValueError("detections must be nonempty")
    if corrections is not None and len(corrections) != len(detections):
        raise ValueError("corrections must align one-to-one with detections")
    history = TrackHistory(states=[initial])
    current = initial
    for t in range(len(detections)):
        window = detections[t:t + cfg.N]
        state, diag = step(current, window, cfg)
        history.states.append(state)
        history.diagnostics.append(diag)
        if diag.fallback:
            history.events.append(TrackEvent(state.frame_index, "fallback",
                                             diag.fallback))
        if corrections is not None and not frame_passes(state, corrections[t],
                                                        threshold):
            history.events.append(TrackEvent(state.frame_index, "reset",
                                             "correction applied"))
            current = corrections[t]
        else:
            current = state
    return history
