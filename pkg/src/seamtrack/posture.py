"""Behavioral analysis of tracked sequences: spline posture model,
dorsoventral bend angles, eigen-posture PCA, and diffusion coefficients.

Conventions.  Objects are ordered pairwise (left, right) anterior to
posterior, matching the canonical body graph.  Each side is fit with a
natural cubic spline over a chord-length parameter.  Bend angles are the
signed turns of each side's polyline: one angle per adjacent-cell gap, the
turn at each interior cell plus the closing turn between the last chord and
the spline's end tangent, giving 2 * (pair_count - 1) angles per frame.
The sign is taken about the local lateral (left-to-right) axis; flipping
``ventral_positive`` mirrors the convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from seamtrack.core import EmbryoGraph, InsufficientDataError, TrackState


@dataclass(frozen=True)
class PostureDescriptor:
    left_spline: CubicSpline
    right_spline: CubicSpline
    bend_angles: np.ndarray          # left gaps then right gaps
    midpoints: np.ndarray            # lateral pair midpoints, (k, 3)
    axis_vectors: np.ndarray         # midpoint-to-midpoint vectors, (k-1, 3)


def _chord_parameter(points: np.ndarray) -> np.ndarray:
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    steps = np.maximum(steps, 1e-12)
    return np.concatenate([[0.0], np.cumsum(steps)])


def _signed_turn(a: np.ndarray, b: np.ndarray, ref: np.ndarray) -> float:
    """Angle from a to b, signed by the rotation's component along ref."""
    cross = np.cross(a, b)
    mag = float(np.linalg.norm(cross))
    if mag < 1e-12:
        return 0.0
    angle = float(np.arctan2(mag, float(a @ b)))
    sign = 1.0 if float(cross @ ref) >= 0 else -1.0
    return sign * angle


def _side_angles(points: np.ndarray, spline: CubicSpline, s: np.ndarray,
                 laterals: np.ndarray, orient: float) -> np.ndarray:
    k = len(points)
    chords = np.diff(points, axis=0)
    angles = np.empty(k - 1)
    for j in range(1, k - 1):
        angles[j - 1] = _signed_turn(chords[j - 1], chords[j], orient * laterals[j])
    end_tangent = spline(s[-1], 1)
    angles[k - 2] = _signed_turn(chords[-1], end_tangent, orient * laterals[-1])
    return angles


def fit_posture(state: TrackState, graph: EmbryoGraph,
                ventral_positive: float = 1.0) -> PostureDescriptor:
    """Spline both sides and measure the dorsoventral bend angles."""
    n = state.n
    if n != graph.n or n % 2 or n < 4:
        raise ValueError("state must hold an even pairwise-ordered set of >= 4 objects")
    left = state.positions[0::2]
    right = state.positions[1::2]
    k = n // 2
    sl, sr = _chord_parameter(left), _chord_parameter(right)
    left_spline = CubicSpline(sl, left, bc_type="natural")
    right_spline = CubicSpline(sr, right, bc_type="natural")
    laterals = right - left
    norms = np.linalg.norm(laterals, axis=1)
    laterals = laterals / np.maximum(norms, 1e-12)[:, None]
    angles = np.concatenate([
        _side_angles(left, left_spline, sl, laterals, ventral_positive),
        _side_angles(right, right_spline, sr, laterals, ventral_positive),
    ])
    midpoints = 0.5 * (left + right)
    return PostureDescriptor(left_spline, right_spline, angles, midpoints,
                             np.diff(midpoints, axis=0))


def bend_angle_matrix(states: Sequence[TrackState], graph: EmbryoGraph,
                      ventral_positive: float = 1.0) -> np.ndarray:
    return np.array([fit_posture(s, graph, ventral_positive).bend_angles
                     for s in states])


@dataclass(frozen=True)
class EigenDecomposition:
    mean: np.ndarray
    components: np.ndarray           # rows are orthonormal basis vectors
    variance_fractions: np.ndarray   # nonincreasing, sums to 1
    scores: np.ndarray               # per-frame coordinates, (T, d)


def eigen_embryos(bend_angle_sequence) -> EigenDecomposition:
    """Mean-centered PCA of the bend-angle time series.

    Deterministic sign convention: each component's largest-magnitude entry
    is positive.  With zero total variance the fractions are [1, 0, ...]
    over an arbitrary orthonormal basis.
    """
    data = np.asarray(bend_angle_sequence, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("bend angle sequence must be T x d")
    T, d = data.shape
    if T < 2:
        raise InsufficientDataError("need at least 2 frames for PCA")
    mean = data.mean(axis=0)
    centered = data - mean
    cov = centered.T @ centered / (T - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    comps = eigvecs[:, order].T
    for i in range(d):
        j = int(np.argmax(np.abs(comps[i])))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    total = float(eigvals.sum())
    if total <= 0:
        fractions = np.zeros(d)
        fractions[0] = 1.0
    else:
        fractions = eigvals / total
    scores = centered @ comps.T
    return EigenDecomposition(mean, comps, fractions, scores)


@dataclass(frozen=True)
class DiffusionFit:
    coefficient: float               # um^2 / s
    lags: np.ndarray                 # seconds
    msd: np.ndarray                  # um^2
    r_squared: float
    nonlinear: bool                  # the MSD curve is a poor fit to 6 D tau


def msd_curve(track: np.ndarray, max_lag: int) -> np.ndarray:
    track = np.asarray(track, dtype=np.float64)
    out = np.empty(max_lag)
    for lag in range(1, max_lag + 1):
        diff = track[lag:] - track[:-lag]
        out[lag - 1] = float(np.mean(np.sum(diff * diff, axis=1)))
    return out


def diffusion_fit(track, dt: float, r2_threshold: float = 0.95) -> DiffusionFit:
    """Least-squares fit of MSD(tau) = 6 D tau over the first quarter of lags.

    The fit is inverse-variance weighted: for Brownian motion the variance
    of an overlapping-window MSD estimate grows like tau^3 / (T - tau), so
    long lags carry almost no information and would otherwise dominate a
    plain fit through the origin.
    """
    track = np.asarray(track, dtype=np.float64)
    if track.ndim != 2 or track.shape[1] != 3:
        raise ValueError("track must be T x 3")
    if len(track) < 10:
        raise InsufficientDataError("need at least 10 samples")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    T = len(track)
    max_lag = max(1, (T - 1) // 4)
    msd = msd_curve(track, max_lag)
    taus = dt * np.arange(1, max_lag + 1)
    lags = np.arange(1, max_lag + 1)
    weights = (T - lags) / lags.astype(np.float64) ** 3
    denom = float(np.sum(weights * taus * taus))
    D = float(np.sum(weights * msd * taus) / (6.0 * denom))
    resid = msd - 6.0 * D * taus
    ss_tot = float(np.sum(weights * msd * msd))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(weights * resid * resid)) / ss_tot
    return DiffusionFit(D, taus, msd, r2, bool(r2 < r2_threshold))


def diffusion_coefficient(track, dt: float) -> float:
    return diffusion_fit(track, dt).coefficient
