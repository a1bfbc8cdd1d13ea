"""Gated cost matrices, exact linear assignment, and ranked K-best enumeration.

The cost matrix for n tracks and m detections is n x (m + n): the left block
holds gated Euclidean distances, the right block is diagonal with each
track's gate radius so that every track always has the fallback of taking no
detection.  Detections may go unassigned (debris carries no cost).

K-best enumeration follows Murty's partitioning scheme with two of the
classic refinements: subproblems inherit the parent's solution structure,
and children enter the priority queue unsolved, bounded below by the parent
objective, and are only solved when popped.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import count
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from seamtrack.core import DetectionSet, GateConfig, InfeasibleError, InvalidConfigError, TrackState


@dataclass(frozen=True)
class CostMatrix:
    """Dense n x (m + n) cost matrix with +inf for forbidden cells."""

    entries: np.ndarray
    m: int

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.float64)
        n = e.shape[0]
        if e.ndim != 2 or e.shape[1] != self.m + n:
            raise ValueError(f"entries must be n x (m + n); got {e.shape} with m={self.m}")
        finite = np.isfinite(e)
        if n and not finite.any(axis=1).all():
            raise ValueError("every row needs at least one finite entry")
        if np.any(e[finite] < 0):
            raise ValueError("finite costs must be nonnegative")
        if np.any(np.isnan(e)):
            raise ValueError("NaN cost")
        e = e.copy()
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class RankedAssignment:
    """One enumerated assignment.  ``objective`` is the ranking key; for
    pooled enumeration it includes the parent offset while ``unary`` is the
    assignment's own cost-matrix total."""

    assignment: np.ndarray
    objective: float
    unary: float
    parent_index: int = 0

    def __post_init__(self):
        phi = np.asarray(self.assignment, dtype=np.intp).copy()
        phi.setflags(write=False)
        object.__setattr__(self, "assignment", phi)


def build_cost_matrix(predicted: TrackState, detections: DetectionSet,
                      gates: GateConfig) -> CostMatrix:
    """Gated distances in the left block, per-track gate diagonal on the right.

    Distances strictly beyond a track's gate are hard-forbidden (+inf), not
    merely expensive.
    """
    n = predicted.n
    m = detections.m
    d = gates.radii(n)
    entries = np.full((n, m + n), np.inf)
    if m:
        diff = predicted.positions[:, None, :] - detections.points[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        dist[dist > d[:, None]] = np.inf
        entries[:, :m] = dist
    entries[np.arange(n), m + np.arange(n)] = d
    return CostMatrix(entries, m)


def _columns_to_phi(cols: np.ndarray, m: int) -> np.ndarray:
    # column j < m is detection j+1; columns >= m are gate columns -> 0
    phi = cols + 1
    phi[cols >= m] = 0
    return phi


def solve_lap(C: CostMatrix) -> Tuple[np.ndarray, float]:
    """Exact minimum-cost assignment: one column per track, each detection
    column used at most once.  Returns (phi, objective)."""
    phi, obj = _solve_work(C.entries, C.m)
    if phi is None:
        raise InfeasibleError("no feasible assignment")
    return phi, obj


def _solve_work(work: np.ndarray, m: int):
    """LAP on a working matrix; returns (phi, objective) or (None, inf)."""
    n = work.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.intp), 0.0
    if not np.isfinite(work).any(axis=1).all():
        return None, np.inf
    try:
        rows, cols = linear_sum_assignment(work)
    except ValueError:
        return None, np.inf
    total = work[rows, cols].sum()
    if not np.isfinite(total):
        return None, np.inf
    order = np.argsort(rows)
    return _columns_to_phi(cols[order], m), float(total)


class _MurtyNode:
    """A subproblem: forbidden cells plus rows forced to specific columns."""

    __slots__ = ("forbidden", "forced", "parent_index")

    def __init__(self, forbidden, forced, parent_index):
        self.forbidden = forbidden      # tuple of (row, col)
        self.forced = forced            # tuple of (row, col)
        self.parent_index = parent_index

    def working_matrix(self, base: np.ndarray) -> np.ndarray:
        work = base.copy()
        for r, c in self.forbidden:
            work[r, c] = np.inf
        for r, c in self.forced:
            kept = base[r, c]
            work[r, :] = np.inf
            work[r, c] = kept
        return work


def _phi_to_cols(phi: np.ndarray, m: int) -> np.ndarray:
    cols = phi - 1
    cols[phi == 0] = m + np.flatnonzero(phi == 0)
    return cols


def _ranked_enumeration(pool, K) -> List[RankedAssignment]:
    """Shared-queue Murty over one or more (CostMatrix, offset) subproblem roots.

    ``pool`` is a sequence of (entries, m, offset).  Children are queued
    lazily with the parent objective as a lower bound (offsets included), so
    pops interleave across roots in global cost order.
    """
    if K is not None and not math.isinf(K):
        K = int(K)
        if K < 1:
            raise InvalidConfigError("K must be >= 1")
    else:
        K = None

    seq = count()
    heap = []
    for idx, (entries, m, offset) in enumerate(pool):
        node = _MurtyNode((), (), idx)
        phi, obj = _solve_work(entries, m)
        if phi is None:
            continue
        heapq.heappush(heap, (offset + obj, tuple(phi), next(seq), node, phi, obj, True))

    results: List[RankedAssignment] = []
    while heap and (K is None or len(results) < K):
        key, _, _, node, phi, obj, solved = heapq.heappop(heap)
        entries, m, offset = pool[node.parent_index]
        if not solved:
            phi, obj = _solve_work(node.working_matrix(entries), m)
            if phi is None:
                continue
            heapq.heappush(heap, (offset + obj, tuple(phi), next(seq), node, phi, obj, True))
            continue
        results.append(RankedAssignment(phi, offset + obj, obj, node.parent_index))
        # Partition the remaining solutions of this subproblem on the free rows.
        cols = _phi_to_cols(phi.copy(), m)
        forced_rows = {r for r, _ in node.forced}
        free_rows = [r for r in range(entries.shape[0]) if r not in forced_rows]
        fixed: list = list(node.forced)
        for r in free_rows:
            child = _MurtyNode(node.forbidden + ((r, cols[r]),), tuple(fixed),
                               node.parent_index)
            # lower bound: a child of a restricted problem can't beat its parent
            heapq.heappush(heap, (offset + obj, (), next(seq), child, None, None, False))
            fixed.append((r, cols[r]))
    return results


def murty_k_best(C: CostMatrix, K) -> List[RankedAssignment]:
    """The min(K, #feasible) cheapest assignments in nondecreasing order.

    Pass ``math.inf`` (or ``None``) as K to enumerate every feasible
    assignment.  The first element always equals ``solve_lap``'s optimum.
    """
    return _ranked_enumeration([(C.entries, C.m, 0.0)], K)


def k_best_of_k(parents: Sequence[Tuple[CostMatrix, float]], K) -> List[RankedAssignment]:
    """Globally cheapest (parent_cost + assignment cost) picks across parents.

    A single shared priority queue interleaves Murty partitioning of every
    parent's subproblem, so no parent is enumerated deeper than the global
    ranking requires.
    """
    if not parents:
        raise InvalidConfigError("parents must be nonempty")
    pool = [(cm.entries, cm.m, float(off)) for cm, off in parents]
    return _ranked_enumeration(pool, K)
