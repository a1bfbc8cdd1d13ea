"""Core value types: track states, detection sets, the body graph, hypotheses.

All types are immutable after construction and safe to share across threads.
Coordinates are physical micrometers throughout; any voxel scaling belongs to
ingestion code, not here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class SeamtrackError(Exception):
    """Base class for errors raised by this package."""


class InvalidConfigError(SeamtrackError):
    """A configuration value is out of its legal range."""


class InfeasibleError(SeamtrackError):
    """An assignment problem has no feasible solution."""


class InsufficientDataError(SeamtrackError):
    """Not enough samples to fit a statistical model."""


def _as_points(values, name: str) -> np.ndarray:
    pts = np.asarray(values, dtype=np.float64)
    if pts.size == 0:
        pts = pts.reshape(0, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"{name} must be an (k, 3) array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError(f"{name} contains non-finite coordinates")
    pts.setflags(write=False)
    return pts


@dataclass(frozen=True)
class TrackState:
    """Positions of all n tracked objects at one frame.

    ``validity`` marks objects as tracked (True) or lost (False); positions
    are kept for lost objects so downstream geometry never sees holes.
    """

    frame_index: int
    positions: np.ndarray
    validity: np.ndarray = None

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        pos = _as_points(self.positions, "positions")
        object.__setattr__(self, "positions", pos)
        if self.validity is None:
            valid = np.ones(len(pos), dtype=bool)
        else:
            valid = np.asarray(self.validity, dtype=bool).copy()
        if valid.shape != (len(pos),):
            raise ValueError("validity must have one flag per object")
        valid.setflags(write=False)
        object.__setattr__(self, "validity", valid)

    @property
    def n(self) -> int:
        return len(self.positions)

    def translated(self, offset) -> "TrackState":
        off = np.asarray(offset, dtype=np.float64)
        return TrackState(self.frame_index, self.positions + off, self.validity)


@dataclass(frozen=True)
class DetectionSet:
    """Unlabeled candidate points at one frame; may be empty."""

    frame_index: int
    points: np.ndarray

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        pts = _as_points(self.points, "points")
        if len(pts) > 1:
            # exact duplicates would make assignment indices ambiguous
            uniq = np.unique(pts, axis=0)
            if len(uniq) != len(pts):
                raise ValueError("detection points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class EmbryoGraph:
    """Vertex/edge structure encoding object interdependence.

    ``body_segments`` lists vertex quadruples (aL, aR, bL, bR) for sequential
    left/right pairs, anterior to posterior; they drive intersection pruning.
    """

    vertex_labels: tuple
    edges: tuple
    body_segments: tuple = ()

    def __post_init__(self):
        labels = tuple(str(v) for v in self.vertex_labels)
        object.__setattr__(self, "vertex_labels", labels)
        n = len(labels)
        seen = set()
        edges = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            edges.append(key)
        object.__setattr__(self, "edges", tuple(edges))
        segs = []
        for quad in self.body_segments:
            quad = tuple(int(q) for q in quad)
            if len(quad) != 4 or any(not (0 <= q < n) for q in quad):
                raise ValueError(f"bad body segment {quad}")
            segs.append(quad)
        object.__setattr__(self, "body_segments", tuple(segs))

    @property
    def n(self) -> int:
        return len(self.vertex_labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, vertex: int) -> tuple:
        return tuple(sorted(v if u == vertex else u
                            for u, v in self.edges if vertex in (u, v)))

    def edge_array(self) -> np.ndarray:
        arr = np.asarray(self.edges, dtype=np.intp).reshape(-1, 2)
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class GateConfig:
    """Non-association radius per object: a uniform scalar or one per object."""

    gate_radius: object = 7.5

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gate_radius, dtype=np.float64))
        if g.ndim != 1 or not np.all(np.isfinite(g)) or np.any(g <= 0):
            raise InvalidConfigError("gates must be finite and > 0")
        g.setflags(write=False)
        object.__setattr__(self, "gate_radius", g)

    def radii(self, n: int) -> np.ndarray:
        g = self.gate_radius
        if len(g) == 1:
            return np.full(n, g[0])
        if len(g) != n:
            raise InvalidConfigError(f"expected {n} gates, got {len(g)}")
        return np.asarray(g)


@dataclass(frozen=True)
class Hypothesis:
    """One gated track-to-detection assignment plus its completed state.

    ``assignment[i]`` is 0 when object i is gated (no detection), otherwise
    the 1-based index of the detection it takes.  No detection index may
    appear twice.
    """

    assignment: np.ndarray
    completed_state: TrackState
    unary_cost: float
    model_cost: float = 0.0
    cumulative_cost: float = 0.0

    def __post_init__(self):
        phi = np.asarray(self.assignment, dtype=np.intp).copy()
        if phi.ndim != 1:
            raise ValueError("assignment must be a flat vector")
        if np.any(phi < 0):
            raise ValueError("assignment values must be >= 0")
        taken = phi[phi > 0]
        if len(np.unique(taken)) != len(taken):
            raise ValueError("assignment is not one-to-one: a detection repeats")
        if len(phi) != self.completed_state.n:
            raise ValueError("completed state must cover every object")
        phi.setflags(write=False)
        object.__setattr__(self, "assignment", phi)

    @property
    def detected(self) -> np.ndarray:
        return np.flatnonzero(self.assignment > 0)

    @property
    def undetected(self) -> np.ndarray:
        return np.flatnonzero(self.assignment == 0)


def pair_names(pair_count: int) -> list:
    """Anterior-to-posterior pair labels: H0..H2, V1..Vk, then T."""
    heads = min(3, pair_count - 1)
    names = [f"H{i}" for i in range(heads)]
    names += [f"V{i + 1}" for i in range(pair_count - heads - 1)]
    names.append("T")
    return names


def build_canonical_embryo_graph(pair_count: int) -> EmbryoGraph:
    """Build the standard two-sided body graph over ``2 * pair_count`` vertices.

    Pair p occupies vertex indices (2p, 2p+1) = (left, right).  Edges run
    laterally within each pair, longitudinally between sequential cells on
    each side, and along both diagonals between sequential pairs.  Body
    segments are the quadrilaterals of sequential pairs, anterior first.
    """
    if pair_count < 2:
        raise InvalidConfigError("pair_count must be >= 2")
    labels = []
    for name in pair_names(pair_count):
        labels += [f"{name}L", f"{name}R"]
    edges = []
    for p in range(pair_count):
        edges.append((2 * p, 2 * p + 1))                    # lateral
    for p in range(pair_count - 1):
        edges.append((2 * p, 2 * p + 2))                    # longitudinal L
        edges.append((2 * p + 1, 2 * p + 3))                # longitudinal R
        edges.append((2 * p, 2 * p + 3))                    # diagonal L->R
        edges.append((2 * p + 1, 2 * p + 2))                # diagonal R->L
    segments = [(2 * p, 2 * p + 1, 2 * p + 2, 2 * p + 3)
                for p in range(pair_count - 1)]
    return EmbryoGraph(tuple(labels), tuple(edges), tuple(segments))
