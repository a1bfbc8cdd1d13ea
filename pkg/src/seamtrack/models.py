"""Association cost models: edge-length features, fitted covariances, and the
five hypothesis-scoring variants (mht, embryo, posture, movement, pm).

The data-driven variants score a hypothesized update by the Mahalanobis size
of the frame-to-frame change in a feature vector: edge lengths of the body
graph for posture-style costs, stacked coordinates for movement-style costs.
Covariances are fitted from per-step feature differences on annotated data
and ridge-regularized before inversion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from seamtrack.core import EmbryoGraph, Hypothesis, InsufficientDataError, TrackState

VARIANTS = ("mht", "embryo", "posture", "movement", "pm")

COVARIANCE_FORMAT = "seamtrack-covariance/1"


def edge_features(state: TrackState, graph: EmbryoGraph) -> np.ndarray:
    """Lengths of every graph edge, in graph edge order."""
    if state.n != graph.n:
        raise ValueError(f"state has {state.n} objects, graph expects {graph.n}")
    ea = graph.edge_array()
    if len(ea) == 0:
        return np.zeros(0)
    diff = state.positions[ea[:, 0]] - state.positions[ea[:, 1]]
    return np.sqrt(np.sum(diff * diff, axis=1))


def movement_features(state: TrackState) -> np.ndarray:
    """Stacked (x1, y1, z1, x2, ...) coordinate vector of length 3n."""
    return state.positions.ravel().copy()


@dataclass(frozen=True)
class CovarianceModel:
    """Fitted step-difference statistics with a ready precision matrix."""

    mean_diff: np.ndarray
    covariance: np.ndarray
    inverse: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in ("posture", "movement"):
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        mean = np.asarray(self.mean_diff, dtype=np.float64).copy()
        cov = np.asarray(self.covariance, dtype=np.float64).copy()
        inv = np.asarray(self.inverse, dtype=np.float64).copy()
        k = len(mean)
        if cov.shape != (k, k) or inv.shape != (k, k):
            raise ValueError("covariance/inverse shape mismatch")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-9:
            raise ValueError("covariance not symmetric")
        for a in (mean, cov, inv):
            a.setflags(write=False)
        object.__setattr__(self, "mean_diff", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "inverse", inv)

    @property
    def dim(self) -> int:
        return len(self.mean_diff)


def fit_covariance(feature_sequence: Sequence[np.ndarray], kind: str = "posture",
                   ridge_scale: float = 1e-6,
                   ridge: Optional[float] = None) -> CovarianceModel:
    """Fit step-difference mean and covariance from a feature time series.

    With T frames there are T-1 differences; the covariance of the centered
    differences uses the unbiased T-2 denominator, then gains a ridge of
    ``ridge`` (absolute) or ``ridge_scale * trace / dim`` before inversion so
    short or degenerate training data still yields a usable precision matrix.
    """
    feats = np.asarray(feature_sequence, dtype=np.float64)
    if feats.ndim != 2:
        raise ValueError("feature_sequence must be T x dim")
    T, dim = feats.shape
    if T < 3:
        raise InsufficientDataError(f"need at least 3 frames, got {T}")
    diffs = np.diff(feats, axis=0)
    mean = diffs.mean(axis=0)
    centered = diffs - mean
    cov = (centered.T @ centered) / (T - 2)
    cov = 0.5 * (cov + cov.T)
    if ridge is None:
        trace = float(np.trace(cov))
        ridge = ridge_scale * (trace / dim if trace > 0 else 1.0)
    cov = cov + ridge * np.eye(dim)
    inv = np.linalg.inv(cov)
    inv = 0.5 * (inv + inv.T)
    return CovarianceModel(mean, cov, inv, kind)


def fit_movement_covariance(states: Sequence[TrackState], graph: EmbryoGraph,
                            block_sparse: bool = False,
                            ridge_scale: float = 1e-6,
                            ridge: Optional[float] = None) -> CovarianceModel:
    """Movement covariance over stacked coordinates (3n x 3n).

    ``block_sparse`` keeps only the 3x3 blocks of graph-adjacent object pairs
    (plus the diagonal blocks); masking can break positive semidefiniteness,
    so the ridge is raised to clear any negative eigenvalue it introduces.
    """
    feats = [movement_features(s) for s in states]
    model = fit_covariance(feats, kind="movement", ridge_scale=ridge_scale, ridge=ridge)
    if not block_sparse:
        return model
    n = graph.n
    mask = np.zeros((n, n), dtype=bool)
    np.fill_diagonal(mask, True)
    for u, v in graph.edges:
        mask[u, v] = mask[v, u] = True
    big = np.kron(mask, np.ones((3, 3), dtype=bool))
    cov = np.where(big, model.covariance, 0.0)
    cov = 0.5 * (cov + cov.T)
    eigmin = float(np.linalg.eigvalsh(cov).min())
    if eigmin < 0:
        cov = cov + (1e-9 - eigmin) * np.eye(3 * n)
    inv = np.linalg.inv(cov)
    inv = 0.5 * (inv + inv.T)
    return CovarianceModel(model.mean_diff, cov, inv, "movement")


def mahalanobis_cost(current: np.ndarray, previous: np.ndarray,
                     model: CovarianceModel) -> float:
    """sqrt(d' S^-1 d) for d = current - previous.

    The fitted mean difference is deliberately not subtracted: the cost
    measures raw step size in the fitted metric.
    """
    cur = np.asarray(current, dtype=np.float64)
    prev = np.asarray(previous, dtype=np.float64)
    if cur.shape != prev.shape or cur.shape != (model.dim,):
        raise ValueError(f"feature dimension mismatch: {cur.shape} vs {prev.shape} "
                         f"vs model dim {model.dim}")
    d = cur - prev
    q = float(d @ model.inverse @ d)
    return float(np.sqrt(max(q, 0.0)))


@dataclass(frozen=True)
class AssociationModel:
    """A scoring variant bound to its graph and any fitted covariances."""

    variant: str
    graph: EmbryoGraph
    posture_cov: Optional[CovarianceModel] = None
    movement_cov: Optional[CovarianceModel] = None
    unary_weight: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.unary_weight < 0:
            raise ValueError("unary_weight must be >= 0")
        if self.variant in ("posture", "pm"):
            if self.posture_cov is None:
                raise ValueError(f"{self.variant} requires a posture covariance")
            if self.posture_cov.dim != self.graph.edge_count:
                raise ValueError("posture covariance dim != graph edge count")
        if self.variant in ("movement", "pm"):
            if self.movement_cov is None:
                raise ValueError(f"{self.variant} requires a movement covariance")
            if self.movement_cov.dim != 3 * self.graph.n:
                raise ValueError("movement covariance dim != 3n")


def state_update_cost(model: AssociationModel, completed: TrackState,
                      prev: TrackState, unary: float,
                      prev_edges: Optional[np.ndarray] = None) -> float:
    """Score a completed state update against the previous state.

    mht: the unary cost alone.  embryo: L2 edge-length change plus weighted
    unary.  posture/movement: Mahalanobis step costs in their fitted metrics.
    pm: posture + movement + weighted unary.  ``prev_edges`` lets hot loops
    reuse the previous frame's edge features.
    """
    if model.variant == "mht":
        return float(unary)
    lam = model.unary_weight
    cost = 0.0
    if model.variant in ("embryo", "posture", "pm"):
        prev_e = edge_features(prev, model.graph) if prev_edges is None else prev_edges
        cur_e = edge_features(completed, model.graph)
        if model.variant == "embryo":
            cost += float(np.linalg.norm(cur_e - prev_e))
        else:
            cost += mahalanobis_cost(cur_e, prev_e, model.posture_cov)
    if model.variant in ("movement", "pm"):
        cost += mahalanobis_cost(completed.positions.ravel(),
                                 prev.positions.ravel(), model.movement_cov)
    if model.variant in ("embryo", "posture", "pm"):
        cost += lam * float(unary)
    return cost


def evaluate_hypothesis(model: AssociationModel, hyp: Hypothesis, prev: TrackState,
                        unary: float) -> float:
    """Variant cost of a hypothesis; see ``state_update_cost``."""
    return state_update_cost(model, hyp.completed_state, prev, unary)


def observed_state_sequence(detection_sets, annotation_states,
                            match_threshold: float = 7.5):
    """Training-time state reconstruction: annotation identities carried by
    their matched detections.

    For each frame, detections are assigned one-to-one to annotation
    positions within ``match_threshold``; matched objects take the detection
    position (observation noise included), unmatched objects keep the
    annotation position.  Fitting covariances on these states bakes the
    detector's noise floor into the metric, which is what tracking actually
    sees.
    """
    from seamtrack.assignment import build_cost_matrix, solve_lap
    from seamtrack.core import GateConfig

    out = []
    gates = GateConfig(match_threshold)
    for det, ann in zip(detection_sets, annotation_states):
        if det.m == 0:
            out.append(ann)
            continue
        C = build_cost_matrix(ann, det, gates)
        phi, _ = solve_lap(C)
        pos = ann.positions.copy()
        matched = phi > 0
        pos[matched] = det.points[phi[matched] - 1]
        out.append(TrackState(ann.frame_index, pos, ann.validity))
    return out


def save_covariance(model: CovarianceModel, path) -> None:
    """Write the portable JSON container (dimension header, row-major payloads)."""
    payload = {
        "format": COVARIANCE_FORMAT,
        "kind": model.kind,
        "dim": model.dim,
        "mean_diff": model.mean_diff.tolist(),
        "covariance": model.covariance.ravel().tolist(),
        "inverse": model.inverse.ravel().tolist(),
    }
    Path(path).write_text(json.dumps(payload))


def load_covariance(path) -> CovarianceModel:
    raw = json.loads(Path(path).read_text())
    if raw.get("format") != COVARIANCE_FORMAT:
        raise ValueError(f"not a covariance container: {raw.get('format')!r}")
    dim = int(raw["dim"])
    mean = np.asarray(raw["mean_diff"], dtype=np.float64)
    cov = np.asarray(raw["covariance"], dtype=np.float64).reshape(dim, dim)
    inv = np.asarray(raw["inverse"], dtype=np.float64).reshape(dim, dim)
    return CovarianceModel(mean, cov, inv, raw["kind"])
