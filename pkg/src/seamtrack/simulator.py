"""Synthetic generator of embryo-like correlated motion and corrupted detections.

The body is a chain of paired left/right points built by forward kinematics:
fixed segment and pair spacing, per-joint dorsoventral bend angles, and a
small twist.  Motion mixes a smooth traveling bending wave, whole-body
random-walk drift, and Poisson-timed "twitches" that jump the bend angles of
a contiguous body section, rigidly swinging everything posterior to the
twitched joints.  Segment geometry is rigid by construction, so graph edge
lengths stay near their rest values.

Detections corrupt the ground truth with isotropic noise, per-object
dropout, uniform debris in a box around the body, and merging of close
pairs; detection order is shuffled every frame.  All randomness flows from a
single PCG64 generator in a fixed draw order, so (config, seed) yields
identical output everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from seamtrack.core import DetectionSet, InvalidConfigError, TrackState

MAX_JOINT_BEND = 1.1          # rad; keeps diagonals within the rigidity budget
MAX_JOINT_TWIST = 1.6
TWITCH_RELAXATION = 0.95      # per-frame decay of twitch offsets once a swing ends
TWITCH_RAMP_FRAMES = (4, 7)   # a twitch swings over this many frames
WIDTH_FRACTION = 0.30         # pair spacing as a fraction of segment length
# smooth low-rank shape variation, scaled by motion.bend_amplitude: a
# traveling lateral squeeze wave and a peristaltic segment-length wave
BREATHE_WIDTH_AMP = 0.23      # fraction of bend_amplitude
BREATHE_WIDTH_FREQ = 0.24     # cycles per frame
BREATHE_LENGTH_AMP = 0.20     # fraction of bend_amplitude
BREATHE_LENGTH_FREQ = 0.17
BASE_COIL_TURNS = 0.95         # resting coil of the body, in full turns


@dataclass(frozen=True)
class MotionConfig:
    drift_sigma: float = 0.15
    twitch_probability: float = 0.06
    twitch_rotation_max: float = 0.45
    bend_amplitude: float = 0.25
    bend_frequency: float = 0.012

    def __post_init__(self):
        if not 0.0 <= self.twitch_probability <= 1.0:
            raise InvalidConfigError("twitch_probability must be in [0, 1]")
        for name in ("drift_sigma", "twitch_rotation_max", "bend_amplitude",
                     "bend_frequency"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(f"{name} must be >= 0")


@dataclass(frozen=True)
class CorruptionConfig:
    """Detection corruption.  ``dropout_probability`` is the marginal
    per-object miss rate; misses come in bursts (a dim nucleus stays dim for
    a few frames), with ``dropout_persistence`` the chance a missing object
    stays missing next frame."""

    dropout_probability: float = 0.0
    dropout_persistence: float = 0.7
    debris_rate: float = 0.0
    debris_box: float = 60.0
    merge_distance: float = 0.0
    noise_sigma: float = 0.0
    noise_persistence: float = 0.85

    def __post_init__(self):
        if not 0.0 <= self.dropout_probability <= 1.0:
            raise InvalidConfigError("dropout_probability must be in [0, 1]")
        if not 0.0 <= self.dropout_persistence < 1.0:
            raise InvalidConfigError("dropout_persistence must be in [0, 1)")
        if not 0.0 <= self.noise_persistence < 1.0:
            raise InvalidConfigError("noise_persistence must be in [0, 1)")
        for name in ("debris_rate", "debris_box", "merge_distance", "noise_sigma"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(f"{name} must be >= 0")

    @property
    def dropout_entry_rate(self) -> float:
        """Per-frame probability a visible object starts a missing burst,
        chosen so the stationary missing fraction matches
        ``dropout_probability``."""
        p, s = self.dropout_probability, self.dropout_persistence
        if p <= 0:
            return 0.0
        return min(1.0, p * (1.0 - s) / max(1.0 - p, 1e-12))


@dataclass(frozen=True)
class SimConfig:
    pair_count: int = 10
    frame_count: int = 100
    seed: int = 0
    motion: MotionConfig = field(default_factory=MotionConfig)
    corruption: CorruptionConfig = field(default_factory=CorruptionConfig)
    scale: float = 54.0

    def __post_init__(self):
        if self.pair_count < 2:
            raise InvalidConfigError("pair_count must be >= 2")
        if self.frame_count < 1:
            raise InvalidConfigError("frame_count must be >= 1")
        if self.scale <= 0:
            raise InvalidConfigError("scale must be > 0")


def _rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix about a unit axis."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    cross = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return c * np.eye(3) + s * cross + (1 - c) * np.outer(axis, axis)


def _chain_positions(bends: np.ndarray, twists: np.ndarray, lengths: np.ndarray,
                     widths: np.ndarray) -> np.ndarray:
    """Forward kinematics: pair midline plus lateral offsets.

    ``bends[j]``/``twists[j]`` act at the joint before pair j+1.  Bends
    rotate the tangent about the current lateral axis (dorsoventral bending);
    twists roll the lateral axis about the tangent.  Per-joint lengths and
    per-pair widths carry the smooth breathing modulation.
    """
    k = len(bends) + 1
    tangent = np.array([1.0, 0.0, 0.0])
    lateral = np.array([0.0, 0.0, 1.0])
    mid = np.zeros((k, 3))
    lat = np.zeros((k, 3))
    lat[0] = lateral
    for j in range(k - 1):
        if twists[j]:
            lateral = _rotation(tangent, twists[j]) @ lateral
        tangent = _rotation(lateral, bends[j]) @ tangent
        mid[j + 1] = mid[j] + lengths[j] * tangent
        lat[j + 1] = lateral
    pos = np.empty((2 * k, 3))
    pos[0::2] = mid - 0.5 * widths[:, None] * lat      # left
    pos[1::2] = mid + 0.5 * widths[:, None] * lat      # right
    return pos


def generate(cfg: SimConfig) -> Tuple[List[TrackState], List[DetectionSet]]:
    """Ground-truth states and corrupted detection sets for every frame."""
    rng = np.random.default_rng(np.random.PCG64(cfg.seed))
    k = cfg.pair_count
    n = 2 * k
    joints = k - 1
    length = cfg.scale / max(joints, 1)
    width = WIDTH_FRACTION * length
    base_bend = 2 * np.pi * BASE_COIL_TURNS / max(joints, 1)
    phases = rng.uniform(0, 2 * np.pi, joints)
    twitch_bend = np.zeros(joints)
    twitch_twist = np.zeros(joints)
    swing_bend = np.zeros(joints)     # total amplitude of the active swing
    swing_twist = np.zeros(joints)
    swing_len = 0
    swing_pos = 0
    drift = np.zeros(3)
    missing = np.zeros(n, dtype=bool)
    noise_state = rng.normal(0.0, cfg.corruption.noise_sigma, (n, 3)) \
        if cfg.corruption.noise_sigma > 0 else np.zeros((n, 3))

    truth: List[TrackState] = []
    detections: List[DetectionSet] = []
    mo, co = cfg.motion, cfg.corruption
    for t in range(cfg.frame_count):
        if t > 0:
            if swing_pos < swing_len:
                # sinusoidal rate profile: a swing starts slowly, peaks
                # mid-way, and eases out, like a muscle contraction
                w = np.sin(np.pi * (swing_pos + 0.5) / swing_len)
                norm = np.sin(np.pi * (np.arange(swing_len) + 0.5) / swing_len).sum()
                twitch_bend += swing_bend * (w / norm)
                twitch_twist += swing_twist * (w / norm)
                swing_pos += 1
            else:
                twitch_bend *= TWITCH_RELAXATION
                twitch_twist *= TWITCH_RELAXATION
            if swing_pos >= swing_len and rng.random() < mo.twitch_probability:
                # a twitch bends a short contiguous joint section over a few
                # frames; a counter-bend at the next joint localizes the
                # swing so the posterior body does not rigidly follow
                a = int(rng.integers(0, max(joints - 1, 1)))
                b = min(int(a + 1 + rng.integers(0, 3)), max(joints - 1, 1))
                if b <= a:
                    b = a + 1
                swing_len = int(rng.integers(TWITCH_RAMP_FRAMES[0],
                                             TWITCH_RAMP_FRAMES[1] + 1))
                swing_pos = 0
                swing_bend = np.zeros(joints)
                swing_twist = np.zeros(joints)
                swing_bend[a:b] = rng.uniform(-mo.twitch_rotation_max,
                                              mo.twitch_rotation_max, b - a)
                swing_twist[a:b] = 0.5 * rng.uniform(-mo.twitch_rotation_max,
                                                     mo.twitch_rotation_max, b - a)
                if b < joints:
                    swing_bend[b] = -0.8 * swing_bend[a:b].sum()
                    swing_twist[b] = -0.8 * swing_twist[a:b].sum()
            drift = drift + rng.normal(0.0, mo.drift_sigma, 3)

        wave = mo.bend_amplitude * np.sin(
            2 * np.pi * (mo.bend_frequency * t + phases / (2 * np.pi)))
        bends = np.clip(base_bend + wave + twitch_bend, -MAX_JOINT_BEND,
                        MAX_JOINT_BEND)
        twists = np.clip(twitch_twist, -MAX_JOINT_TWIST, MAX_JOINT_TWIST)
        # low-rank natural shape variation: a traveling squeeze wave in pair
        # spacing and a peristaltic wave in segment lengths
        widths = width * (1.0 + BREATHE_WIDTH_AMP * mo.bend_amplitude * np.sin(
            2 * np.pi * (BREATHE_WIDTH_FREQ * t + np.arange(k) / k)))
        lengths = length * (1.0 + BREATHE_LENGTH_AMP * mo.bend_amplitude * np.sin(
            2 * np.pi * (BREATHE_LENGTH_FREQ * t + np.arange(joints) / joints)))
        pos = _chain_positions(bends, twists, lengths, widths) + drift
        truth.append(TrackState(t, pos))
        detections.append(_corrupt(pos, t, co, rng, missing, noise_state))
    return truth, detections


def _corrupt(pos: np.ndarray, frame: int, co: CorruptionConfig,
             rng: np.random.Generator, missing: np.ndarray,
             noise: np.ndarray) -> DetectionSet:
    n = len(pos)
    u = rng.random(n)
    entry = co.dropout_entry_rate
    missing[:] = np.where(missing, u < co.dropout_persistence, u < entry)
    if co.dropout_probability >= 1.0:
        missing[:] = True
    keep = ~missing
    # detection offsets persist across frames (segmentation bias drifts
    # rather than resampling), hence the AR(1) update
    rho = co.noise_persistence
    fresh = rng.normal(0.0, co.noise_sigma, (n, 3)) if co.noise_sigma > 0 else np.zeros((n, 3))
    noise[:] = rho * noise + np.sqrt(1.0 - rho * rho) * fresh
    pts = pos[keep] + noise[keep]

    if co.merge_distance > 0 and len(pts) > 1:
        pts = _merge_close(pts, co.merge_distance)

    n_debris = int(rng.poisson(co.debris_rate)) if co.debris_rate > 0 else 0
    if n_debris:
        center = pos.mean(axis=0)
        debris = center + rng.uniform(-0.5 * co.debris_box, 0.5 * co.debris_box,
                                      (n_debris, 3))
        pts = np.vstack([pts, debris]) if len(pts) else debris

    if len(pts) > 1:
        pts = pts[rng.permutation(len(pts))]
    return DetectionSet(frame, pts)


def _merge_close(pts: np.ndarray, merge_distance: float) -> np.ndarray:
    """Replace mutually close pairs with their midpoints, closest pair first."""
    alive = list(range(len(pts)))
    out = []
    pts = pts.copy()
    while alive:
        if len(alive) == 1:
            out.append(pts[alive.pop()])
            break
        sub = pts[alive]
        d = np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=2)
        np.fill_diagonal(d, np.inf)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] >= merge_distance:
            out.extend(pts[a] for a in alive)
            break
        hi, lo = max(i, j), min(i, j)
        out.append(0.5 * (sub[i] + sub[j]))
        alive.pop(hi)
        alive.pop(lo)
    return np.asarray(out) if out else pts[:0]


@dataclass(frozen=True)
class MovementStrata:
    """Per-frame summed displacement with rank-based quartile/decile labels."""

    displacements: np.ndarray
    quartile: Tuple[str, ...]
    decile: Tuple[str, ...]


def _rank_labels(values: np.ndarray, buckets: int, prefix: str) -> Tuple[str, ...]:
    # ties resolve downward: a frame's bucket is set by how many frames move
    # strictly less than it
    order = np.argsort(values, kind="stable")
    less = np.empty(len(values), dtype=np.intp)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        less[order[i:j + 1]] = i
        i = j + 1
    frac = less / len(values)
    idx = np.minimum((frac * buckets).astype(int), buckets - 1)
    return tuple(f"{prefix}{i + 1}" for i in idx)


def movement_quantiles(ground_truth: Sequence[TrackState]) -> MovementStrata:
    """Summed per-frame displacement and its quartile/decile stratification.

    Frame 0 has displacement 0 by convention.
    """
    if len(ground_truth) < 4:
        raise ValueError("need at least 4 frames to stratify")
    disp = np.zeros(len(ground_truth))
    for t in range(1, len(ground_truth)):
        disp[t] = float(np.linalg.norm(
            ground_truth[t].positions - ground_truth[t - 1].positions, axis=1).sum())
    return MovementStrata(disp, _rank_labels(disp, 4, "Q"), _rank_labels(disp, 10, "D"))
