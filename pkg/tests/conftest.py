"""Shared fixtures and independent oracles used across the suite."""

import numpy as np
import pytest

from seamtrack.assignment import CostMatrix, build_cost_matrix
from seamtrack.core import DetectionSet, GateConfig, TrackState


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def brute_force_assignments(C: CostMatrix):
    """Every feasible gated assignment with its objective, by recursion.

    Deliberately naive: tries detection columns and the gate column per row,
    enforcing one-to-one detections.  This is the assignment oracle.
    """
    n, m = C.n, C.m
    out = []

    def rec(i, used, phi, cost):
        if i == n:
            out.append((tuple(phi), cost))
            return
        gate = C.entries[i, m + i]
        if np.isfinite(gate):
            phi.append(0)
            rec(i + 1, used, phi, cost + gate)
            phi.pop()
        for j in range(m):
            if j in used:
                continue
            c = C.entries[i, j]
            if np.isfinite(c):
                used.add(j)
                phi.append(j + 1)
                rec(i + 1, used, phi, cost + c)
                phi.pop()
                used.discard(j)

    rec(0, set(), [], 0.0)
    return out


def random_gated_matrix(rng, n=None, m=None, gate=None, spread=10.0):
    n = int(rng.integers(1, 7)) if n is None else n
    m = int(rng.integers(0, 7)) if m is None else m
    gate = float(rng.uniform(2.5, 8.0)) if gate is None else gate
    pred = TrackState(0, rng.uniform(0, spread, (n, 3)))
    det = DetectionSet(1, rng.uniform(0, spread, (m, 3)))
    return build_cost_matrix(pred, det, GateConfig(gate))


def assignment_multiset(results):
    """(phi, objective) pairs as a comparison-friendly sorted list."""
    return sorted((tuple(int(x) for x in r.assignment), round(r.objective, 9))
                  for r in results)


def oracle_multiset(pairs):
    return sorted((phi, round(cost, 9)) for phi, cost in pairs)
