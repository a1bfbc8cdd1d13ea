import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seamtrack.core import DetectionSet, Hypothesis, InsufficientDataError, TrackState, build_canonical_embryo_graph
from seamtrack.models import (AssociationModel, CovarianceModel, edge_features,
                              evaluate_hypothesis, fit_covariance,
                              fit_movement_covariance, load_covariance,
                              mahalanobis_cost, observed_state_sequence,
                              save_covariance, state_update_cost)

GRAPH2 = build_canonical_embryo_graph(2)


def _state(positions, frame=0):
    return TrackState(frame, positions)


def test_edge_features_single_edge():
    from seamtrack.core import EmbryoGraph
    g = EmbryoGraph(("a", "b"), ((0, 1),))
    f = edge_features(_state([[0, 0, 0], [1, 0, 0]]), g)
    assert f.tolist() == [1.0]


def test_edge_features_translation_invariant(rng):
    g = build_canonical_embryo_graph(3)
    pos = rng.normal(0, 5, (6, 3))
    a = edge_features(_state(pos), g)
    b = edge_features(_state(pos + np.array([3.0, -2.0, 11.0])), g)
    assert a == pytest.approx(b.tolist(), abs=1e-12)


def test_edge_features_unit_square_geometry():
    # pairs one unit apart, unit lateral spacing: a unit square
    pos = [[0, 0, 0], [0, 1, 0], [1, 0, 0], [1, 1, 0]]
    f = edge_features(_state(pos), GRAPH2)
    assert sorted(f.tolist()) == pytest.approx([1, 1, 1, 1, np.sqrt(2), np.sqrt(2)])


def test_fit_covariance_constant_sequence():
    feats = [np.zeros(3) + 2.0] * 5
    model = fit_covariance(feats)
    assert model.mean_diff == pytest.approx([0, 0, 0])
    # ridge-regularized zero matrix still inverts cleanly
    assert np.allclose(model.covariance @ model.inverse, np.eye(3), atol=1e-6)


def test_fit_covariance_hand_computed_variance():
    feats = [[0.0], [1.0], [0.0], [1.0], [0.0]]
    model = fit_covariance(feats)
    # diffs 1,-1,1,-1 -> mean 0, sum sq 4, T-2 = 3
    assert model.covariance[0, 0] == pytest.approx(4.0 / 3.0, rel=1e-5)
    assert model.mean_diff[0] == pytest.approx(0.0)


def test_fit_covariance_needs_three_frames():
    with pytest.raises(InsufficientDataError):
        fit_covariance([[0.0], [1.0]])


@given(st.integers(min_value=3, max_value=30), st.integers(min_value=1, max_value=6),
       st.integers(min_value=0, max_value=10_000))
@settings(max_examples=40, deadline=None)
def test_fit_covariance_symmetric_psd(T, dim, seed):
    rng = np.random.default_rng(seed)
    model = fit_covariance(rng.normal(0, 1, (T, dim)))
    assert np.max(np.abs(model.covariance - model.covariance.T)) <= 1e-9
    assert np.linalg.eigvalsh(model.covariance).min() >= 0
    assert np.allclose(model.covariance @ model.inverse, np.eye(dim), atol=1e-6)


def _iso_model(dim, sigma2=1.0):
    cov = sigma2 * np.eye(dim)
    return CovarianceModel(np.zeros(dim), cov, np.eye(dim) / sigma2, "posture")


def test_mahalanobis_zero_and_identity():
    m = _iso_model(3)
    assert mahalanobis_cost([1, 2, 3], [1, 2, 3], m) == 0.0
    assert mahalanobis_cost([1, 2, 2], [0, 0, 0], m) == pytest.approx(3.0)


def test_mahalanobis_diagonal_hand_case():
    cov = np.diag([1.0, 4.0])
    m = CovarianceModel(np.zeros(2), cov, np.diag([1.0, 0.25]), "posture")
    assert mahalanobis_cost([1, 1], [0, 0], m) == pytest.approx(np.sqrt(1.25))


def test_mahalanobis_sigma_scaled_identity_reduces_to_norm(rng):
    # acceptance tolerance: 1e-9
    for _ in range(25):
        dim = int(rng.integers(1, 8))
        sigma = float(rng.uniform(0.1, 4.0))
        m = _iso_model(dim, sigma ** 2)
        d = rng.normal(0, 3, dim)
        assert mahalanobis_cost(d, np.zeros(dim), m) == pytest.approx(
            np.linalg.norm(d) / sigma, abs=1e-9)


def test_mahalanobis_dimension_mismatch():
    with pytest.raises(ValueError):
        mahalanobis_cost([1.0], [1.0, 2.0], _iso_model(2))


def _random_assoc_setup(rng, variant, lam=1.0):
    g = GRAPH2
    train = [TrackState(t, rng.normal(0, 3, (4, 3))) for t in range(12)]
    pcov = fit_covariance([edge_features(s, g) for s in train], "posture")
    mcov = fit_movement_covariance(train, g)
    return AssociationModel(variant, g,
                            posture_cov=pcov if variant in ("posture", "pm") else None,
                            movement_cov=mcov if variant in ("movement", "pm") else None,
                            unary_weight=lam)


def test_zero_difference_costs_nothing(rng):
    prev = _state(rng.normal(0, 2, (4, 3)))
    hyp = Hypothesis(np.array([1, 2, 3, 4]), TrackState(1, prev.positions), 0.0)
    for variant in ("embryo", "posture", "movement", "pm"):
        model = _random_assoc_setup(rng, variant, lam=0.0)
        assert evaluate_hypothesis(model, hyp, prev, unary=5.0) == pytest.approx(0.0, abs=1e-7)


def test_mht_variant_returns_unary(rng):
    model = AssociationModel("mht", GRAPH2)
    prev = _state(rng.normal(0, 2, (4, 3)))
    hyp = Hypothesis(np.array([0, 0, 0, 0]), TrackState(1, prev.positions), 3.25)
    assert evaluate_hypothesis(model, hyp, prev, unary=3.25) == 3.25


def test_pm_is_additive_at_zero_unary_weight(rng):
    g = GRAPH2
    train = [TrackState(t, rng.normal(0, 3, (4, 3))) for t in range(15)]
    pcov = fit_covariance([edge_features(s, g) for s in train], "posture")
    mcov = fit_movement_covariance(train, g)
    pm = AssociationModel("pm", g, posture_cov=pcov, movement_cov=mcov, unary_weight=0.0)
    po = AssociationModel("posture", g, posture_cov=pcov, unary_weight=0.0)
    mo = AssociationModel("movement", g, movement_cov=mcov)
    for _ in range(10):
        prev = _state(rng.normal(0, 2, (4, 3)))
        cur = TrackState(1, prev.positions + rng.normal(0, 1, (4, 3)))
        total = state_update_cost(pm, cur, prev, unary=2.0)
        parts = (state_update_cost(po, cur, prev, unary=2.0)
                 + state_update_cost(mo, cur, prev, unary=2.0))
        assert total == pytest.approx(parts, rel=1e-12)


def test_data_driven_variants_require_covariance():
    with pytest.raises(ValueError):
        AssociationModel("posture", GRAPH2)
    with pytest.raises(ValueError):
        AssociationModel("pm", GRAPH2)


def test_embryo_and_posture_translation_invariant(rng):
    model = _random_assoc_setup(rng, "posture")
    emb = AssociationModel("embryo", GRAPH2)
    prev = _state(rng.normal(0, 2, (4, 3)))
    cur = TrackState(1, prev.positions + rng.normal(0, 1, (4, 3)))
    shift = np.array([5.0, -7.0, 2.0])
    for m in (model, emb):
        a = state_update_cost(m, cur, prev, unary=1.0)
        b = state_update_cost(m, TrackState(1, cur.positions + shift),
                              prev.translated(shift), unary=1.0)
        assert a == pytest.approx(b, rel=1e-9)


def test_movement_invariant_to_common_translation(rng):
    model = _random_assoc_setup(rng, "movement")
    prev = _state(rng.normal(0, 2, (4, 3)))
    cur = TrackState(1, prev.positions + rng.normal(0, 1, (4, 3)))
    shift = np.array([1.0, 2.0, 3.0])
    a = state_update_cost(model, cur, prev, unary=0.0)
    b = state_update_cost(model, TrackState(1, cur.positions + shift),
                          prev.translated(shift), unary=0.0)
    assert a == pytest.approx(b, rel=1e-9)


def test_embryo_argmin_invariant_under_uniform_scaling(rng):
    # edge lengths are homogeneous in the coordinates, so scaling every
    # position scales all edge-length differences uniformly
    emb = AssociationModel("embryo", GRAPH2, unary_weight=0.0)
    prev = _state(rng.normal(0, 2, (4, 3)))
    candidates = [TrackState(1, prev.positions + rng.normal(0, 1, (4, 3)))
                  for _ in range(6)]
    costs = [state_update_cost(emb, c, prev, 0.0) for c in candidates]
    scale = 3.7
    prev_s = _state(prev.positions * scale)
    costs_s = [state_update_cost(emb, TrackState(1, c.positions * scale), prev_s, 0.0)
               for c in candidates]
    assert int(np.argmin(costs)) == int(np.argmin(costs_s))
    assert costs_s == pytest.approx([c * scale for c in costs], rel=1e-9)


def test_training_steps_score_finite(rng):
    g = GRAPH2
    train = [TrackState(t, rng.normal(0, 3, (4, 3))) for t in range(10)]
    pcov = fit_covariance([edge_features(s, g) for s in train], "posture")
    for a, b in zip(train, train[1:]):
        c = mahalanobis_cost(edge_features(b, g), edge_features(a, g), pcov)
        assert np.isfinite(c)


def test_block_sparse_movement_covariance_is_psd(rng):
    g = build_canonical_embryo_graph(3)
    train = [TrackState(t, rng.normal(0, 3, (6, 3))) for t in range(8)]
    model = fit_movement_covariance(train, g, block_sparse=True)
    assert np.linalg.eigvalsh(model.covariance).min() >= -1e-12
    # off-graph blocks are zeroed
    nonadj = [(u, v) for u in range(6) for v in range(6)
              if u != v and (min(u, v), max(u, v)) not in g.edges]
    for u, v in nonadj:
        assert np.all(model.covariance[3 * u:3 * u + 3, 3 * v:3 * v + 3] == 0)


def test_covariance_serialization_round_trip(tmp_path, rng):
    g = GRAPH2
    train = [TrackState(t, rng.normal(0, 3, (4, 3))) for t in range(12)]
    model = fit_covariance([edge_features(s, g) for s in train], "posture")
    path = tmp_path / "cov.json"
    save_covariance(model, path)
    loaded = load_covariance(path)
    assert np.array_equal(loaded.covariance, model.covariance)
    assert np.array_equal(loaded.inverse, model.inverse)
    assert np.array_equal(loaded.mean_diff, model.mean_diff)
    assert loaded.kind == model.kind


def test_observed_state_sequence_uses_matched_detections(rng):
    ann = [TrackState(t, rng.uniform(0, 20, (4, 3))) for t in range(3)]
    dets = [DetectionSet(t, ann[t].positions + 0.1) for t in range(3)]
    obs = observed_state_sequence(dets, ann, match_threshold=2.0)
    for o, a in zip(obs, ann):
        assert o.positions == pytest.approx(a.positions + 0.1)
