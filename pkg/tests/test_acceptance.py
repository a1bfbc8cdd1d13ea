"""Acceptance suite: one test per criterion, each printing a PASS line.

The two trend-reproduction tests regenerate their data and run the full
benchmark protocol; together they dominate the suite's runtime (minutes,
bounded below half an hour).  Run with ``-s`` to watch the lines appear.
"""

import math
import time

import numpy as np
import pytest

from seamtrack.assignment import build_cost_matrix, murty_k_best
from seamtrack.core import (DetectionSet, EmbryoGraph, GateConfig, Hypothesis,
                            TrackState, build_canonical_embryo_graph)
from seamtrack.evaluation import frame_passes, score_run
from seamtrack.geometry import segments_intersect
from seamtrack.interpolation import complete_state
from seamtrack.models import (AssociationModel, CovarianceModel, edge_features,
                              evaluate_hypothesis, fit_covariance,
                              fit_movement_covariance, load_covariance,
                              mahalanobis_cost, save_covariance)
from seamtrack.posture import diffusion_coefficient, eigen_embryos, fit_posture
from seamtrack.search import SearchConfig, step, track_sequence
from seamtrack.simulator import CorruptionConfig, MotionConfig, SimConfig, generate
from seamtrack import benchmark as bench

from conftest import (assignment_multiset, brute_force_assignments,
                      oracle_multiset, random_gated_matrix)
from test_geometry import TWO_SEGMENTS, _oracle_quads_intersect
from test_search import _joint_two_frame_optimum, _histories_identical, _mht_cfg


def _ok(name):
    print(f"\n[ACCEPTANCE] {name}: PASS")


def test_assignment_oracle_500_matrices():
    rng = np.random.default_rng(1001)
    t0 = time.perf_counter()
    for _ in range(500):
        C = random_gated_matrix(rng)
        ranked = murty_k_best(C, math.inf)
        oracle = brute_force_assignments(C)
        assert assignment_multiset(ranked) == oracle_multiset(oracle)
        objs = np.array([r.objective for r in ranked])
        assert np.all(np.diff(objs) >= -1e-9)
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"assignment oracle took {elapsed:.1f}s"
    _ok(f"assignment oracle (500 matrices, {elapsed:.1f}s)")


def test_search_oracle_200_instances():
    rng = np.random.default_rng(2002)
    graph = EmbryoGraph(("a", "b", "c"), ((0, 1), (1, 2)))
    model = AssociationModel("embryo", graph)
    t0 = time.perf_counter()
    for _ in range(200):
        prev = TrackState(0, rng.uniform(0, 8, (3, 3)))
        det1 = DetectionSet(1, rng.uniform(0, 8, (int(rng.integers(0, 5)), 3)))
        det2 = DetectionSet(2, rng.uniform(0, 8, (int(rng.integers(0, 5)), 3)))
        cfg = SearchConfig(model, GateConfig(5.0), K=math.inf, N=2,
                           regime="explicit", prune_intersections=False)
        _, diag = step(prev, [det1, det2], cfg)
        oracle = _joint_two_frame_optimum(prev, det1, det2, cfg)
        assert diag.chosen_path_cost == pytest.approx(oracle, abs=1e-12)
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"search oracle took {elapsed:.1f}s"
    _ok(f"search oracle (200 instances, {elapsed:.1f}s)")


def test_regime_relations():
    g = build_canonical_embryo_graph(4)
    corr = CorruptionConfig(dropout_probability=0.05, debris_rate=0.4,
                            debris_box=30.0, noise_sigma=0.25)
    for seed in range(100):
        truth, dets = generate(SimConfig(4, 12, seed=seed, corruption=corr,
                                         scale=30.0))
        h_exp = track_sequence(truth[0], dets[1:],
                               _mht_cfg(g, gate=6.0, K=1, N=3, regime="explicit"))
        h_kb = track_sequence(truth[0], dets[1:],
                              _mht_cfg(g, gate=6.0, K=1, N=3, regime="kbest"))
        assert _histories_identical(h_exp, h_kb), f"K=1 regimes differ at seed {seed}"

    g = build_canonical_embryo_graph(3)
    rng = np.random.default_rng(3003)
    for _ in range(40):
        prev = TrackState(0, rng.uniform(0, 10, (6, 3)))
        dets = [DetectionSet(t, rng.uniform(0, 10, (6, 3))) for t in (1, 2, 3)]
        for K in (2, 3, 5):
            for N in (2, 3):
                ce = _mht_cfg(g, gate=8.0, K=K, N=N, regime="explicit", prune=False)
                ck = _mht_cfg(g, gate=8.0, K=K, N=N, regime="kbest", prune=False)
                _, de = step(prev, dets[:N], ce)
                _, dk = step(prev, dets[:N], ck)
                assert de.chosen_path_cost <= dk.chosen_path_cost + 1e-9
    _ok("regime relations (K=1 identity on 100 sequences; explicit <= kbest)")


def test_interpolation_equivariance_and_exactness():
    g = build_canonical_embryo_graph(3)
    rng = np.random.default_rng(4004)
    for _ in range(1000):
        prev = TrackState(0, rng.normal(0, 5, (6, 3)))
        m = int(rng.integers(0, 7))
        det = DetectionSet(1, rng.normal(0, 5, (m, 3)))
        phi = np.zeros(6, dtype=int)
        take = rng.permutation(6)[:m]
        phi[take] = rng.permutation(m) + 1
        shift = rng.normal(0, 10, 3)
        out = complete_state(prev, phi, det, g)
        shifted = complete_state(prev.translated(shift), phi,
                                 DetectionSet(1, det.points + shift) if m
                                 else DetectionSet(1, []), g)
        assert shifted.positions == pytest.approx(out.positions + shift, abs=1e-9)

        # single detected neighbor moving by a pure translation is carried
        # exactly
        u = int(rng.integers(0, 6))
        nbrs = [v for v in range(6) if (min(u, v), max(u, v)) in g.edges]
        v = nbrs[int(rng.integers(0, len(nbrs)))]
        delta = rng.normal(0, 4, 3)
        det1 = DetectionSet(1, [prev.positions[v] + delta])
        phi1 = np.zeros(6, dtype=int)
        phi1[v] = 1
        solo = complete_state(prev, phi1, det1, g)
        assert solo.positions[u] == pytest.approx(prev.positions[u] + delta,
                                                  abs=1e-9)
    _ok("interpolation equivariance and single-neighbor exactness (1000 cases)")


def test_geometry_oracle_agreement():
    rng = np.random.default_rng(6021)
    disagreements = 0
    for _ in range(200):
        center_a = rng.uniform(-2, 2, 3)
        center_b = center_a + rng.uniform(-1.5, 1.5, 3) * (1 if rng.random() < 0.5 else 4)
        qa = center_a + rng.uniform(-2.5, 2.5, (4, 3))
        qb = center_b + rng.uniform(-2.5, 2.5, (4, 3))
        state = TrackState(0, np.vstack([qa, qb]))
        got = segments_intersect(state, TWO_SEGMENTS)
        want = _oracle_quads_intersect(qa, qb)
        disagreements += (got != want)
    assert disagreements == 0
    _ok("geometry oracle (200 segment pairs, zero disagreements)")


def test_statistical_model_checks(tmp_path):
    rng = np.random.default_rng(5005)
    g = build_canonical_embryo_graph(3)
    # symmetric PSD with usable inverse
    for _ in range(30):
        T, dim = int(rng.integers(3, 40)), int(rng.integers(1, 10))
        model = fit_covariance(rng.normal(0, 2, (T, dim)))
        assert np.max(np.abs(model.covariance - model.covariance.T)) <= 1e-9
        assert np.linalg.eigvalsh(model.covariance).min() >= 0
        assert np.allclose(model.covariance @ model.inverse, np.eye(dim), atol=1e-6)
    # sigma^2 I reduces to scaled Euclidean norm within 1e-9
    for _ in range(50):
        dim = int(rng.integers(1, 12))
        sigma = float(rng.uniform(0.05, 5.0))
        m = CovarianceModel(np.zeros(dim), sigma ** 2 * np.eye(dim),
                            np.eye(dim) / sigma ** 2, "posture")
        d = rng.normal(0, 3, dim)
        assert abs(mahalanobis_cost(d, np.zeros(dim), m)
                   - np.linalg.norm(d) / sigma) <= 1e-9
    # serialization round trip preserves hypothesis evaluation to 1e-12
    train = [TrackState(t, rng.normal(0, 4, (6, 3))) for t in range(25)]
    pcov = fit_covariance([edge_features(s, g) for s in train], "posture")
    mcov = fit_movement_covariance(train, g)
    save_covariance(pcov, tmp_path / "p.json")
    save_covariance(mcov, tmp_path / "m.json")
    pm = AssociationModel("pm", g, posture_cov=pcov, movement_cov=mcov)
    pm2 = AssociationModel("pm", g,
                           posture_cov=load_covariance(tmp_path / "p.json"),
                           movement_cov=load_covariance(tmp_path / "m.json"))
    for _ in range(100):
        prev = TrackState(0, rng.normal(0, 4, (6, 3)))
        cur = TrackState(1, prev.positions + rng.normal(0, 1, (6, 3)))
        hyp = Hypothesis(np.arange(1, 7), cur, unary_cost=1.5)
        assert abs(evaluate_hypothesis(pm, hyp, prev, 1.5)
                   - evaluate_hypothesis(pm2, hyp, prev, 1.5)) <= 1e-12
    _ok("statistical model checks (PSD, sigma-identity 1e-9, round trip 1e-12)")


def test_evaluation_protocol():
    ann = TrackState(0, [[0, 0, 0]])
    assert frame_passes(TrackState(0, [[7.5, 0, 0]]), ann) is True
    assert frame_passes(TrackState(0, [[7.5 + 1e-6, 0, 0]]), ann) is False

    g = build_canonical_embryo_graph(4)
    corr = CorruptionConfig(dropout_probability=0.06, debris_rate=0.8,
                            debris_box=35.0, noise_sigma=0.35)
    mo = MotionConfig(drift_sigma=0.25, twitch_probability=0.3,
                      twitch_rotation_max=1.0, bend_amplitude=0.3,
                      bend_frequency=0.02)
    for seed in range(50):
        truth, dets = generate(SimConfig(4, 30, seed=seed, motion=mo,
                                         corruption=corr, scale=35.0))
        hist = track_sequence(truth[0], dets[1:], _mht_cfg(g, gate=7.5),
                              corrections=truth[1:])
        report = score_run(hist, truth)
        resets = [e.frame_index for e in hist.events if e.kind == "reset"]
        assert resets == report.error_frames, f"event mismatch at seed {seed}"
    _ok("evaluation protocol (7.5 um boundary; 50-run event identity)")


def test_posture_analytics():
    rng = np.random.default_rng(7007)
    # PCA oracle equivalence at 1e-8
    data = rng.normal(0, 1, (60, 18))
    eig = eigen_embryos(data)
    centered = data - data.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    assert eig.variance_fractions == pytest.approx(s ** 2 / np.sum(s ** 2), abs=1e-8)
    cum = np.cumsum(eig.variance_fractions)
    assert np.all(np.diff(cum) >= -1e-12)
    assert cum[-1] == pytest.approx(1.0, abs=1e-8)

    # random-walk diffusion recovery within 15%
    sigma, dt = 0.5, 0.25
    track = np.cumsum(rng.normal(0, sigma, (10_000, 3)), axis=0)
    D = diffusion_coefficient(track, dt)
    assert abs(D - sigma ** 2 / (2 * dt)) / (sigma ** 2 / (2 * dt)) < 0.15

    # constant-curvature bend angles match the analytic turn within 1e-6
    g10 = build_canonical_embryo_graph(10)
    dtheta, radius, width = 0.22, 25.0, 2.0
    theta = np.arange(10) * dtheta
    left = np.stack([radius * np.sin(theta), radius * np.cos(theta),
                     np.zeros(10)], axis=1)
    pos = np.empty((20, 3))
    pos[0::2] = left
    pos[1::2] = left + [0, 0, width]
    desc = fit_posture(TrackState(0, pos), g10)
    for side in (desc.bend_angles[:9], desc.bend_angles[9:]):
        assert np.abs(np.abs(side[:-1]) - dtheta).max() < 1e-6
    _ok("posture analytics (PCA 1e-8; diffusion 15%; arc angles 1e-6)")


@pytest.fixture(scope="module")
def fitted_models():
    return bench.fit_models()


def test_table2_trend_reproduction(fitted_models):
    t0 = time.perf_counter()
    rows = bench.run_grid(bench.model_suite_cells(frames=2000), fitted_models)
    verdicts = bench.model_suite_verdicts(rows)
    elapsed = time.perf_counter() - t0
    means = verdicts["means"]
    print(f"\n[ACCEPTANCE] model-suite means over seeds: "
          f"gnn={means['gnn']:.2f} mht={means['mht']:.2f} "
          f"embryo={means['embryo']:.2f} pm={means['pm']:.2f} "
          f"({elapsed / 60:.1f} min)")
    assert elapsed < 1800, f"model suite took {elapsed:.0f}s"
    assert verdicts["pm_lt_embryo"], f"pm {means['pm']:.2f} !< embryo {means['embryo']:.2f}"
    assert verdicts["embryo_lt_gnn"], f"embryo {means['embryo']:.2f} !< gnn {means['gnn']:.2f}"
    assert verdicts["pm_monotone_in_K"], "pm error not monotone in K within one SE"
    assert verdicts["gnn_lt_mht"], f"gnn {means['gnn']:.2f} !< mht {means['mht']:.2f}"
    _ok("model-suite trend reproduction")


def test_table3_trend_reproduction():
    fitted = bench.fit_models(bench.HEAVY_MOTION, bench.HEAVY_CORRUPTION)
    t0 = time.perf_counter()
    rows = bench.run_grid(bench.gate_sweep_cells(frames=600), fitted)
    verdicts = bench.gate_sweep_verdicts(rows)
    elapsed = time.perf_counter() - t0
    print(f"\n[ACCEPTANCE] gate sweep: gnn by gate "
          f"{[round(x, 2) for x in verdicts['gnn_by_gate']]}, pm by gate "
          f"{[round(x, 2) for x in verdicts['pm_by_gate']]} ({elapsed / 60:.1f} min)")
    assert verdicts["pm_beats_gnn_at_wide_gate"], "pm !< gnn at 12.5 um on every seed"
    assert verdicts["pm_less_gate_sensitive"], "pm gate spread not below gnn's"
    _ok("gate-sweep trend reproduction")
