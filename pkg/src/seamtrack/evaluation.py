"""Detection-quality metrics and the posture-tracking error protocol.

A frame passes when every tracked object sits within a threshold (default
7.5 um) of its own annotation under the identity pairing and nothing is
flagged lost.  A failed frame counts once; the tracking loop then resets
from the annotation, so error rate is the percentage of frames requiring a
correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from seamtrack.assignment import build_cost_matrix, solve_lap
from seamtrack.core import DetectionSet, GateConfig, TrackState

PASS_THRESHOLD_UM = 7.5


def match_detections(detections: DetectionSet, annotations: DetectionSet,
                     threshold: float) -> Tuple[float, float, float]:
    """One-to-one minimum-cost matching scored as (precision, recall, F1).

    Pairs farther than ``threshold`` cannot match.  Zero detections give
    precision 0 (recall 0 unless annotations are also empty, in which case
    all three metrics are 1).
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    m_det, m_ann = detections.m, annotations.m
    if m_det == 0 and m_ann == 0:
        return 1.0, 1.0, 1.0
    if m_det == 0 or m_ann == 0:
        return 0.0, 0.0, 0.0
    rows = TrackState(0, detections.points)
    cols = DetectionSet(0, annotations.points)
    C = build_cost_matrix(rows, cols, GateConfig(threshold))
    phi, _ = solve_lap(C)
    tp = int(np.count_nonzero(phi > 0))
    precision = tp / m_det
    recall = tp / m_ann
    f1 = 0.0 if tp == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def frame_passes(predicted: TrackState, annotation: TrackState,
                 threshold: float = PASS_THRESHOLD_UM) -> bool:
    """Identity-pairing test: every object within threshold, none lost.

    Objects without an annotation (annotation validity False) are skipped;
    a lost flag on the prediction fails the frame outright.
    """
    if predicted.n != annotation.n:
        raise ValueError("predicted and annotation must have the same object count")
    if not predicted.validity.all():
        return False
    check = annotation.validity
    if not check.any():
        return True
    d = np.linalg.norm(predicted.positions[check] - annotation.positions[check], axis=1)
    return bool(np.all(d <= threshold))


@dataclass
class EvalReport:
    """Per-frame outcomes plus overall and stratified error rates (percent)."""

    frame_indices: List[int]
    frame_results: List[bool]
    error_frames: List[int]
    error_rate: float
    stratified: Dict[str, Dict[str, float]] = field(default_factory=dict)
    stratum_counts: Dict[str, Dict[str, int]] = field(default_factory=dict)
    detection_metrics: Optional[Tuple[float, float, float]] = None
    metadata: Dict = field(default_factory=dict)

    @property
    def frame_count(self) -> int:
        return len(self.frame_results)


def _predicted_states(history) -> List[TrackState]:
    states = getattr(history, "states", history)
    return list(states)


def score_run(history, annotations: Sequence[TrackState],
              strata: Optional[Dict[str, Sequence[str]]] = None,
              threshold: float = PASS_THRESHOLD_UM,
              metadata: Optional[Dict] = None) -> EvalReport:
    """Score tracker output frame-by-frame against annotations.

    When ``history`` is a TrackHistory, its first state is the given initial
    condition and is not scored; annotations must align with history.states.
    A plain list of states is scored pairwise against annotations as handed.
    ``strata`` maps a stratification name (e.g. "quartile") to one label per
    scored frame; rates are reported per label.
    """
    states = _predicted_states(history)
    anns = list(annotations)
    skip_first = hasattr(history, "states")
    if skip_first:
        states = states[1:]
        anns = anns[1:]
    if len(states) != len(anns):
        raise ValueError(f"history has {len(states)} scored frames, "
                         f"annotations {len(anns)}")
    results = []
    error_frames = []
    indices = []
    for st, ann in zip(states, anns):
        ok = frame_passes(st, ann, threshold)
        results.append(ok)
        indices.append(st.frame_index)
        if not ok:
            error_frames.append(st.frame_index)
    total = len(results)
    rate = 100.0 * len(error_frames) / total if total else 0.0
    report = EvalReport(indices, results, error_frames, rate,
                        metadata=dict(metadata or {}))
    if strata:
        for name, labels in strata.items():
            labels = list(labels)
            if len(labels) != total:
                raise ValueError(f"stratum {name!r} has {len(labels)} labels "
                                 f"for {total} frames")
            rates: Dict[str, float] = {}
            counts: Dict[str, int] = {}
            for lab in sorted(set(labels)):
                mask = [l == lab for l in labels]
                k = sum(mask)
                fails = sum(1 for ok, inc in zip(results, mask) if inc and not ok)
                counts[lab] = k
                rates[lab] = 100.0 * fails / k if k else 0.0
            report.stratified[name] = rates
            report.stratum_counts[name] = counts
    return report
