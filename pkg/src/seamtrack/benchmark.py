"""Benchmark protocols: synthetic trend reproduction suites.

Two fixed protocols over the synthetic generator, evaluated with the
correction protocol and stratified by movement quartile:

* the model-comparison suite (moderate corruption, generous gate): GNN
  baseline, unary lookahead, and the graph/data-driven models at K up to 5,
  N = 5, on 5 held-out seeds with covariances fitted on an independent
  training seed;
* the gate-sweep suite (heavy corruption): GNN vs the combined model at
  K = 25, N = 2 across gates 2.5 .. 12.5 um.

Grid cells are independent processes; set SEAMTRACK_WORKERS to override the
worker count.  Every cell regenerates its data deterministically from the
seed, so rows are reproducible in isolation.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from multiprocessing import get_context
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from seamtrack.core import GateConfig, build_canonical_embryo_graph
from seamtrack.evaluation import score_run
from seamtrack.models import (AssociationModel, CovarianceModel, edge_features,
                              fit_covariance, fit_movement_covariance,
                              observed_state_sequence)
from seamtrack.search import SearchConfig, track_sequence
from seamtrack.simulator import (CorruptionConfig, MotionConfig, SimConfig,
                                 generate, movement_quantiles)

PAIR_COUNT = 10
SCALE_UM = 80.0
TRAIN_SEED = 101
TRAIN_FRAMES = 600
TEST_SEEDS = (11, 12, 13, 14, 15)

MOTION = MotionConfig(drift_sigma=0.25, twitch_probability=0.25,
                      twitch_rotation_max=1.0, bend_amplitude=0.3,
                      bend_frequency=0.02)
CORRUPTION = CorruptionConfig(dropout_probability=0.03, dropout_persistence=0.85,
                              debris_rate=0.5, debris_box=80.0,
                              noise_sigma=0.3, noise_persistence=0.9)
MODEL_SUITE_GATE = 25.0

HEAVY_MOTION = MotionConfig(drift_sigma=0.15, twitch_probability=0.15,
                            twitch_rotation_max=0.85, bend_amplitude=0.28,
                            bend_frequency=0.02)
HEAVY_CORRUPTION = CorruptionConfig(dropout_probability=0.06, dropout_persistence=0.5,
                                    debris_rate=4.0, debris_box=30.0,
                                    merge_distance=1.5,
                                    noise_sigma=0.2, noise_persistence=0.9)
GATE_SWEEP = (2.5, 5.0, 7.5, 10.0, 12.5)


@dataclass(frozen=True)
class BenchmarkCell:
    variant: str
    K: float
    N: int
    gate: float
    seed: int
    frames: int
    regime: str = "kbest"
    motion: MotionConfig = MOTION
    corruption: CorruptionConfig = CORRUPTION


def fit_models(motion: MotionConfig = MOTION,
               corruption: CorruptionConfig = CORRUPTION,
               seed: int = TRAIN_SEED,
               frames: int = TRAIN_FRAMES) -> Tuple[CovarianceModel, CovarianceModel]:
    """Cross-sequence protocol: covariances come from a training seed's
    archive, using detections matched back to the annotations."""
    graph = build_canonical_embryo_graph(PAIR_COUNT)
    truth, dets = generate(SimConfig(PAIR_COUNT, frames, seed=seed, motion=motion,
                                     corruption=corruption, scale=SCALE_UM))
    observed = observed_state_sequence(dets, truth)
    pcov = fit_covariance([edge_features(s, graph) for s in observed], "posture")
    mcov = fit_movement_covariance(observed, graph)
    return pcov, mcov


def run_cell(cell: BenchmarkCell,
             fitted: Optional[Tuple[CovarianceModel, CovarianceModel]] = None) -> Dict:
    graph = build_canonical_embryo_graph(PAIR_COUNT)
    if fitted is None:
        fitted = fit_models(cell.motion, cell.corruption)
    pcov, mcov = fitted
    truth, dets = generate(SimConfig(PAIR_COUNT, cell.frames, seed=cell.seed,
                                     motion=cell.motion, corruption=cell.corruption,
                                     scale=SCALE_UM))
    model = AssociationModel(
        cell.variant, graph,
        posture_cov=pcov if cell.variant in ("posture", "pm") else None,
        movement_cov=mcov if cell.variant in ("movement", "pm") else None)
    cfg = SearchConfig(model, GateConfig(cell.gate), K=cell.K, N=cell.N,
                       regime=cell.regime)
    history = track_sequence(truth[0], dets[1:], cfg, corrections=truth[1:])
    strata = movement_quantiles(truth)
    report = score_run(history, truth,
                       strata={"quartile": strata.quartile[1:],
                               "decile": strata.decile[1:]},
                       metadata={"variant": cell.variant, "K": cell.K, "N": cell.N,
                                 "gate": cell.gate, "seed": cell.seed,
                                 "regime": cell.regime, "frames": cell.frames})
    row = dict(report.metadata)
    row["error_rate"] = report.error_rate
    for q in ("Q1", "Q2", "Q3", "Q4"):
        row[q] = report.stratified["quartile"].get(q, 0.0)
    return row


def _cell_worker(args):
    cell, fitted = args
    return run_cell(cell, fitted)


def worker_count() -> int:
    env = os.environ.get("SEAMTRACK_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_grid(cells: Sequence[BenchmarkCell],
             fitted: Optional[Tuple[CovarianceModel, CovarianceModel]] = None,
             workers: Optional[int] = None) -> List[Dict]:
    workers = workers or worker_count()
    args = [(c, fitted) for c in cells]
    if workers <= 1 or len(cells) <= 1:
        return [_cell_worker(a) for a in args]
    with get_context("spawn").Pool(workers) as pool:
        return pool.map(_cell_worker, args)


def model_suite_cells(frames: int = 2000,
                      seeds: Sequence[int] = TEST_SEEDS) -> List[BenchmarkCell]:
    cells = []
    for seed in seeds:
        cells.append(BenchmarkCell("mht", 1, 1, MODEL_SUITE_GATE, seed, frames))
        cells.append(BenchmarkCell("mht", 5, 5, MODEL_SUITE_GATE, seed, frames))
        cells.append(BenchmarkCell("embryo", 5, 5, MODEL_SUITE_GATE, seed, frames))
        for K in (1, 2, 3, 4, 5):
            cells.append(BenchmarkCell("pm", K, 5, MODEL_SUITE_GATE, seed, frames))
    return cells


def gate_sweep_cells(frames: int = 600,
                     seeds: Sequence[int] = TEST_SEEDS) -> List[BenchmarkCell]:
    cells = []
    for seed in seeds:
        for gate in GATE_SWEEP:
            cells.append(BenchmarkCell("mht", 1, 1, gate, seed, frames,
                                       motion=HEAVY_MOTION, corruption=HEAVY_CORRUPTION))
            cells.append(BenchmarkCell("pm", 25, 2, gate, seed, frames,
                                       motion=HEAVY_MOTION, corruption=HEAVY_CORRUPTION))
    return cells


def _mean_err(rows: List[Dict], **match) -> float:
    sel = [r["error_rate"] for r in rows
           if all(r[k] == v for k, v in match.items())]
    if not sel:
        raise ValueError(f"no rows match {match}")
    return float(np.mean(sel))


def model_suite_verdicts(rows: List[Dict]) -> Dict[str, bool]:
    """The ordering and monotonicity checks over the model-comparison rows."""
    gnn = _mean_err(rows, variant="mht", K=1, N=1)
    mht = _mean_err(rows, variant="mht", K=5, N=5)
    emb = _mean_err(rows, variant="embryo", K=5, N=5)
    pm5 = _mean_err(rows, variant="pm", K=5, N=5)
    seeds = sorted({r["seed"] for r in rows})
    monotone = True
    for K in (1, 2, 3, 4):
        diffs = []
        for seed in seeds:
            a = _mean_err(rows, variant="pm", K=K, N=5, seed=seed)
            b = _mean_err(rows, variant="pm", K=K + 1, N=5, seed=seed)
            diffs.append(a - b)
        diffs = np.asarray(diffs)
        se = float(diffs.std(ddof=1) / np.sqrt(len(diffs))) if len(diffs) > 1 else 0.0
        if float(diffs.mean()) < -se:
            monotone = False
    return {
        "pm_lt_embryo": pm5 < emb,
        "embryo_lt_gnn": emb < gnn,
        "gnn_lt_mht": gnn < mht,
        "pm_monotone_in_K": monotone,
        "means": {"gnn": gnn, "mht": mht, "embryo": emb, "pm": pm5},
    }


def gate_sweep_verdicts(rows: List[Dict]) -> Dict[str, bool]:
    seeds = sorted({r["seed"] for r in rows})
    pm_beats_gnn_at_wide_gate = all(
        _mean_err(rows, variant="pm", gate=12.5, seed=s)
        < _mean_err(rows, variant="mht", gate=12.5, seed=s)
        for s in seeds)
    gnn_by_gate = [_mean_err(rows, variant="mht", gate=g) for g in GATE_SWEEP]
    pm_by_gate = [_mean_err(rows, variant="pm", gate=g) for g in GATE_SWEEP]
    pm_spread = max(pm_by_gate) - min(pm_by_gate)
    gnn_spread = max(gnn_by_gate) - min(gnn_by_gate)
    return {
        "pm_beats_gnn_at_wide_gate": pm_beats_gnn_at_wide_gate,
        "pm_less_gate_sensitive": pm_spread < gnn_spread,
        "pm_by_gate": pm_by_gate,
        "gnn_by_gate": gnn_by_gate,
    }


CSV_FIELDS = ("variant", "K", "N", "gate", "seed", "regime", "frames",
              "error_rate", "Q1", "Q2", "Q3", "Q4")


def write_rows_csv(rows: List[Dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k) for k in CSV_FIELDS})
