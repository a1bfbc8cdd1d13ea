"""Body-segment self-intersection tests.

Sequential left/right pairs form quadrilateral body segments; a posture is
geometrically invalid when a nonadjacent pair of segments touches.  Each
quad is tessellated into two triangles and every chord of one segment is
tested as a clipped ray against the triangles of the other, in both
directions, using the Moller-Trumbore algorithm.  The full batch of tests
for a graph is precomputed once and evaluated vectorized.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

import numpy as np

from seamtrack.core import EmbryoGraph, TrackState

PARALLEL_EPS = 1e-9
DEGENERATE_AREA = 1e-12

# chords within a quad (aL, aR, bL, bR): the perimeter plus the diagonal the
# tessellation uses; these are exactly the edges of the two surface triangles
_QUAD_CHORDS = ((0, 1), (2, 3), (0, 2), (1, 3), (0, 3))
# two triangles covering the quad surface
_QUAD_TRIS = ((0, 1, 3), (0, 3, 2))


def ray_triangle_intersection(origin, direction, v0, v1, v2,
                              eps: float = PARALLEL_EPS) -> Optional[float]:
    """Moller-Trumbore: parameter t of the hit, or None.

    Rays parallel to the triangle plane (|det| <= eps) and hits behind the
    origin report None; barycentric bounds are inclusive.
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    v0, v1, v2 = (np.asarray(v, dtype=np.float64) for v in (v0, v1, v2))
    e1 = v1 - v0
    e2 = v2 - v0
    if np.linalg.norm(np.cross(e1, e2)) <= DEGENERATE_AREA:
        return None
    p = np.cross(direction, e2)
    det = float(e1 @ p)
    if abs(det) <= eps:
        return None
    inv_det = 1.0 / det
    tvec = origin - v0
    u = float(tvec @ p) * inv_det
    if u < 0.0 or u > 1.0:
        return None
    q = np.cross(tvec, e1)
    v = float(direction @ q) * inv_det
    if v < 0.0 or u + v > 1.0:
        return None
    t = float(e2 @ q) * inv_det
    return t if t >= 0.0 else None


@lru_cache(maxsize=64)
def _intersection_plan(graph: EmbryoGraph):
    """Index arrays for every (chord, triangle) test between nonadjacent segments."""
    segs = graph.body_segments
    ray_a, ray_b, tri = [], [], []
    for i in range(len(segs)):
        for j in range(len(segs)):
            if i == j or set(segs[i]) & set(segs[j]):
                continue
            for ca, cb in _QUAD_CHORDS:
                for t0, t1, t2 in _QUAD_TRIS:
                    ray_a.append(segs[i][ca])
                    ray_b.append(segs[i][cb])
                    tri.append((segs[j][t0], segs[j][t1], segs[j][t2]))
    if not ray_a:
        return None
    return (np.asarray(ray_a, dtype=np.intp), np.asarray(ray_b, dtype=np.intp),
            np.asarray(tri, dtype=np.intp))


def _batch_hits(origin, direction, v0, v1, v2, eps: float = PARALLEL_EPS) -> np.ndarray:
    e1 = v1 - v0
    e2 = v2 - v0
    area2 = np.linalg.norm(np.cross(e1, e2), axis=1)
    p = np.cross(direction, e2)
    det = np.einsum("ij,ij->i", e1, p)
    ok = (np.abs(det) > eps) & (area2 > DEGENERATE_AREA)
    safe = np.where(ok, det, 1.0)
    inv_det = 1.0 / safe
    tvec = origin - v0
    u = np.einsum("ij,ij->i", tvec, p) * inv_det
    q = np.cross(tvec, e1)
    v = np.einsum("ij,ij->i", direction, q) * inv_det
    t = np.einsum("ij,ij->i", e2, q) * inv_det
    return (ok & (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0)
            & (t >= 0.0) & (t <= 1.0))


def segments_intersect(state: TrackState, graph: EmbryoGraph) -> bool:
    """True iff any chord of a body segment pierces a nonadjacent segment."""
    plan = _intersection_plan(graph)
    if plan is None:
        return False
    ray_a, ray_b, tri = plan
    pos = state.positions
    origin = pos[ray_a]
    direction = pos[ray_b] - origin
    hits = _batch_hits(origin, direction, pos[tri[:, 0]], pos[tri[:, 1]], pos[tri[:, 2]])
    return bool(hits.any())
