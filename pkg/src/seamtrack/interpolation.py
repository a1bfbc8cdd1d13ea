"""Graphical interpolation of objects that received no detection.

An undetected object u borrows the displacement of its detected graph
neighbors: each detected neighbor v predicts u at v's new position minus the
previous-frame offset from u to v, and the predictions are averaged.  With
no detected neighbor, u simply keeps its previous position.  Interpolation
is a single pass over one-hop neighbors; interpolated vertices never feed
other interpolations.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from seamtrack.core import DetectionSet, EmbryoGraph, TrackState
from seamtrack.models import edge_features


@lru_cache(maxsize=64)
def _adjacency(graph: EmbryoGraph):
    adj = [[] for _ in range(graph.n)]
    for u, v in graph.edges:
        adj[u].append(v)
        adj[v].append(u)
    return tuple(tuple(sorted(a)) for a in adj)


def complete_state(prev: TrackState, assignment: np.ndarray,
                   detections: DetectionSet, graph: EmbryoGraph) -> TrackState:
    """Fill every object's position for one assignment: detections where
    assigned, neighbor-carried predictions where gated."""
    phi = np.asarray(assignment, dtype=np.intp)
    n = prev.n
    if phi.shape != (n,):
        raise ValueError("assignment length must equal object count")
    new_pos = np.empty((n, 3))
    detected = phi > 0
    new_pos[detected] = detections.points[phi[detected] - 1]

    adj = _adjacency(graph)
    for u in np.flatnonzero(~detected):
        nbrs = [v for v in adj[u] if detected[v]]
        if nbrs:
            carried = new_pos[nbrs] - (prev.positions[nbrs] - prev.positions[u])
            new_pos[u] = carried.mean(axis=0)
        else:
            new_pos[u] = prev.positions[u]
    return TrackState(detections.frame_index, new_pos, prev.validity)


def interpolation_residual(completed: TrackState, prev: TrackState,
                           graph: EmbryoGraph, assignment: np.ndarray) -> float:
    """Edge-length distortion over edges touching interpolated vertices.

    Diagnostic only: the L2 norm of the edge-feature change restricted to
    edges with at least one gated endpoint.
    """
    phi = np.asarray(assignment, dtype=np.intp)
    if completed.n != prev.n or phi.shape != (prev.n,):
        raise ValueError("shape mismatch")
    gated = phi == 0
    touching = np.array([gated[u] or gated[v] for u, v in graph.edges], dtype=bool)
    if not touching.any():
        return 0.0
    delta = edge_features(completed, graph) - edge_features(prev, graph)
    return float(np.linalg.norm(delta[touching]))
