"""Deterministic synthetic trajectories and per-step feature vectors.

Motion: body speed and angular rates follow mean-reverting (OU) processes
integrated with the exact conditional update, so trajectories are smooth.
Pitch and roll angles are hard-clipped well clear of the Euler singularity,
which guarantees the gimbal guard for every derived relative pose. Two
presets: "vehicle" (fast, gentle turning) and "walker" (slow with an
oscillatory yaw sweep).

Features stand in for a flow front end: a fixed random full-rank linear
encoding of the 6-DoF step motion plus Gaussian observation noise, with
optional pure-noise nuisance channels appended. With zero noise the step
motion is exactly recoverable by least squares, so the regression task is
well posed by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry as geo

_MIN_PITCH_MARGIN = 0.1  # rad between the clamp and pi/2


class InvalidRangeError(ValueError):
    """Subsequence sampling bounds are inconsistent with the source length."""


@dataclass(frozen=True)
class OuParams:
    """Mean-reverting process: d x = -reversion (x - mean) dt + sigma dW."""

    mean: float = 0.0
    reversion: float = 1.0
    sigma: float = 0.0

    def step(self, x: float, dt: float, rng: np.random.Generator) -> float:
        decay = math.exp(-self.reversion * dt)
        if self.sigma == 0.0:
            return x * decay + self.mean * (1.0 - decay)
        std = self.sigma * math.sqrt((1.0 - decay * decay) / (2.0 * self.reversion))
        return x * decay + self.mean * (1.0 - decay) + std * rng.normal()


@dataclass(frozen=True)
class MotionModel:
    dt: float = 0.1
    speed: OuParams = field(default_factory=lambda: OuParams(mean=1.0, reversion=1.0, sigma=0.1))
    roll_rate: OuParams = field(default_factory=lambda: OuParams(reversion=3.0, sigma=0.02))
    pitch_rate: OuParams = field(default_factory=lambda: OuParams(reversion=3.0, sigma=0.02))
    yaw_rate: OuParams = field(default_factory=lambda: OuParams(reversion=1.5, sigma=0.1))
    yaw_oscillation_amp: float = 0.0  # rad/s added to the yaw rate mean
    yaw_oscillation_period: float = 4.0  # seconds
    pitch_clamp: float = 0.4  # |pitch| bound, rad
    roll_clamp: float = 0.3

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("timestep must be positive")
        for name, clamp in (("pitch_clamp", self.pitch_clamp), ("roll_clamp", self.roll_clamp)):
            if clamp < 0 or math.pi / 2 - clamp < _MIN_PITCH_MARGIN:
                raise ValueError(f"{name} must leave >= {_MIN_PITCH_MARGIN} rad of gimbal margin")


def vehicle_motion() -> MotionModel:
    """Driving-like preset: ~10 m/s, low angular rates."""
    return MotionModel(
        dt=0.1,
        speed=OuParams(mean=10.0, reversion=0.5, sigma=0.8),
        roll_rate=OuParams(reversion=4.0, sigma=0.01),
        pitch_rate=OuParams(reversion=4.0, sigma=0.01),
        yaw_rate=OuParams(reversion=1.0, sigma=0.06),
        pitch_clamp=0.25,
        roll_clamp=0.15,
    )


def walker_motion() -> MotionModel:
    """Head-mounted walking preset: ~1.4 m/s with a sweeping yaw pattern."""
    return MotionModel(
        dt=0.1,
        speed=OuParams(mean=1.4, reversion=1.0, sigma=0.25),
        roll_rate=OuParams(reversion=3.0, sigma=0.05),
        pitch_rate=OuParams(reversion=3.0, sigma=0.05),
        yaw_rate=OuParams(reversion=1.5, sigma=0.25),
        yaw_oscillation_amp=0.8,
        yaw_oscillation_period=4.0,
        pitch_clamp=0.35,
        roll_clamp=0.25,
    )


MOTION_PRESETS = {"vehicle": vehicle_motion, "walker": walker_motion}


@dataclass(frozen=True)
class FeatureModel:
    """Fixed linear encoding of the 6-DoF step motion, plus noise channels.

    Observation noise can be frame-correlated (AR(1) with coefficient
    ``noise_rho``) and carry a per-sequence constant offset drawn with
    standard deviation ``bias_sigma``, mimicking calibration drift of a flow
    front end. Both default to the plain white-noise model.
    """

    encoding: np.ndarray  # (feature_dim, 6), full column rank
    noise_sigma: float = 0.0
    nuisance_dim: int = 0
    nuisance_sigma: float = 1.0
    noise_rho: float = 0.0
    bias_sigma: float = 0.0

    def __post_init__(self):
        enc = np.array(self.encoding, dtype=np.float64)
        if enc.ndim != 2 or enc.shape[1] != 6:
            raise ValueError(f"encoding must be (feature_dim, 6), got {enc.shape}")
        if np.linalg.matrix_rank(enc) != 6:
            raise ValueError("encoding must have full column rank")
        enc.flags.writeable = False
        object.__setattr__(self, "encoding", enc)
        if self.noise_sigma < 0 or self.nuisance_sigma < 0 or self.nuisance_dim < 0:
            raise ValueError("noise parameters must be non-negative")
        if not 0.0 <= self.noise_rho < 1.0:
            raise ValueError("noise_rho must be in [0, 1)")
        if self.bias_sigma < 0:
            raise ValueError("bias_sigma must be non-negative")

    @property
    def feature_dim(self) -> int:
        return self.encoding.shape[0] + self.nuisance_dim

    @staticmethod
    def seeded(feature_dim: int, seed: int, noise_sigma=0.0, nuisance_dim=0,
               nuisance_sigma=1.0, noise_rho=0.0, bias_sigma=0.0):
        if feature_dim < 6:
            raise ValueError("feature_dim must be >= 6 for a full-rank encoding")
        rng = np.random.default_rng(seed)
        return FeatureModel(
            rng.normal(size=(feature_dim, 6)),
            noise_sigma=noise_sigma,
            nuisance_dim=nuisance_dim,
            nuisance_sigma=nuisance_sigma,
            noise_rho=noise_rho,
            bias_sigma=bias_sigma,
        )

    @staticmethod
    def identity(extra_rows=0, noise_sigma=0.0, nuisance_dim=0, nuisance_sigma=1.0):
        enc = np.vstack([np.eye(6), np.zeros((extra_rows, 6))])
        return FeatureModel(enc, noise_sigma, nuisance_dim, nuisance_sigma)

    def _observation_noise(self, length: int, rng: np.random.Generator) -> np.ndarray:
        """AR(1) noise with stationary std noise_sigma, plus the sequence bias."""
        width = self.encoding.shape[0]
        noise = np.zeros((length, width))
        if self.noise_sigma > 0:
            innovations = self.noise_sigma * rng.normal(size=(length, width))
            if self.noise_rho == 0.0:
                noise = innovations
            else:
                innovation_scale = math.sqrt(1.0 - self.noise_rho**2)
                row = innovations[0]
                noise[0] = row
                for t in range(1, length):
                    row = self.noise_rho * row + innovation_scale * innovations[t]
                    noise[t] = row
        if self.bias_sigma > 0:
            noise = noise + self.bias_sigma * rng.normal(size=width)
        return noise


@dataclass(frozen=True)
class Sequence:
    """Ground-truth trajectory, its per-step 6-DoF relatives, and features."""

    trajectory: geo.Trajectory
    relatives: np.ndarray  # (T, 6)
    features: np.ndarray  # (T, feature_dim)
    seed: int

    def __post_init__(self):
        if len(self.trajectory) != len(self.relatives) + 1:
            raise ValueError("trajectory must have exactly one more pose than relatives")
        if len(self.relatives) != len(self.features):
            raise ValueError("features must align with relatives")

    def __len__(self) -> int:
        return len(self.relatives)


def generate(
    motion: MotionModel, feature_model: FeatureModel, length: int, seed: int
) -> Sequence:
    """Simulate ``length`` relative steps (length+1 absolute poses)."""
    if length < 2:
        raise ValueError("length must be >= 2")
    rng = np.random.default_rng(seed)
    dt = motion.dt

    speed = motion.speed.mean
    roll_rate = pitch_rate = 0.0
    yaw_rate = 0.0
    roll = pitch = yaw = 0.0
    position = np.zeros(3)
    poses = [geo.Pose.identity()]

    for k in range(length):
        speed = motion.speed.step(speed, dt, rng)
        roll_rate = motion.roll_rate.step(roll_rate, dt, rng)
        pitch_rate = motion.pitch_rate.step(pitch_rate, dt, rng)
        yaw_rate = motion.yaw_rate.step(yaw_rate, dt, rng)
        swept_rate = yaw_rate
        if motion.yaw_oscillation_amp != 0.0:
            swept_rate += motion.yaw_oscillation_amp * math.sin(
                2.0 * math.pi * (k * dt) / motion.yaw_oscillation_period
            )
        heading = poses[-1].rotation_matrix()
        position = position + heading @ np.array([speed * dt, 0.0, 0.0])
        roll = float(np.clip(roll + roll_rate * dt, -motion.roll_clamp, motion.roll_clamp))
        pitch = float(np.clip(pitch + pitch_rate * dt, -motion.pitch_clamp, motion.pitch_clamp))
        yaw = yaw + swept_rate * dt
        poses.append(geo.euler_to_pose(position, [roll, pitch, yaw]))

    trajectory = geo.Trajectory(tuple(poses))
    relatives = np.array(
        [
            geo.pose_to_vector(geo.relative_between(poses[k], poses[k + 1]))
            for k in range(length)
        ]
    )

    features = relatives @ feature_model.encoding.T
    if feature_model.noise_sigma > 0 or feature_model.bias_sigma > 0:
        features = features + feature_model._observation_noise(length, rng)
    if feature_model.nuisance_dim > 0:
        # nuisance channels share the front end's temporal correlation
        noise = feature_model.nuisance_sigma * rng.normal(
            size=(length, feature_model.nuisance_dim)
        )
        if feature_model.noise_rho > 0.0:
            scale = math.sqrt(1.0 - feature_model.noise_rho**2)
            for t in range(1, length):
                noise[t] = feature_model.noise_rho * noise[t - 1] + scale * noise[t]
        features = np.hstack([features, noise])
    return Sequence(trajectory=trajectory, relatives=relatives, features=features, seed=seed)


def sample_subsequences(
    sequence: Sequence, count: int, min_len: int, max_len: int, seed: int
) -> list[Sequence]:
    """Contiguous random slices, re-anchored so each starts at the identity."""
    total = len(sequence)
    if not (1 <= min_len <= max_len <= total):
        raise InvalidRangeError(
            f"need 1 <= min_len <= max_len <= {total}, got [{min_len}, {max_len}]"
        )
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(count):
        length = int(rng.integers(min_len, max_len + 1))
        start = int(rng.integers(0, total - length + 1))
        relatives = sequence.relatives[start : start + length].copy()
        features = sequence.features[start : start + length].copy()
        trajectory = geo.accumulate([geo.vector_to_pose(r) for r in relatives])
        samples.append(
            Sequence(trajectory=trajectory, relatives=relatives, features=features, seed=seed)
        )
    return samples


@dataclass(frozen=True)
class FeatureStats:
    """Training-set feature statistics, reapplied verbatim at test time."""

    mean: np.ndarray
    std: np.ndarray


def feature_stats(dataset: list[Sequence]) -> FeatureStats:
    if not dataset:
        raise ValueError("dataset is empty")
    stacked = np.vstack([seq.features for seq in dataset])
    return FeatureStats(mean=stacked.mean(axis=0), std=stacked.std(axis=0))


def apply_feature_stats(sequence: Sequence, stats: FeatureStats) -> Sequence:
    return replace(sequence, features=sequence.features - stats.mean)


def normalize_features(dataset: list[Sequence]) -> tuple[list[Sequence], FeatureStats]:
    """Remove the per-dimension dataset mean; returns the stats for reuse."""
    stats = feature_stats(dataset)
    return [apply_feature_stats(seq, stats) for seq in dataset], stats


# --- dataset directory layout -------------------------------------------------
#
#   poses/NN.txt     ground-truth trajectory, 3x4-per-line layout
#   features/NN.csv  header row, then one feature row per relative step
#   meta.txt         flat key=value lines (seeds, model parameters)


def save_dataset(directory, sequences: list[Sequence], meta: dict) -> None:
    from pathlib import Path

    directory = Path(directory)
    (directory / "poses").mkdir(parents=True, exist_ok=True)
    (directory / "features").mkdir(parents=True, exist_ok=True)
    for index, seq in enumerate(sequences):
        geo.save_trajectory_kitti(seq.trajectory, directory / "poses" / f"{index:02d}.txt")
        with open(directory / "features" / f"{index:02d}.csv", "w") as f:
            f.write(",".join(f"feat_{i}" for i in range(seq.features.shape[1])) + "\n")
            for row in seq.features:
                f.write(",".join(repr(float(v)) for v in row) + "\n")
    lines = dict(meta)
    lines["sequences"] = len(sequences)
    for index, seq in enumerate(sequences):
        lines[f"seed_{index:02d}"] = seq.seed
    with open(directory / "meta.txt", "w") as f:
        for key in sorted(lines):
            f.write(f"{key} = {lines[key]}\n")


def load_dataset(directory) -> tuple[list[Sequence], dict]:
    from pathlib import Path

    directory = Path(directory)
    meta = {}
    with open(directory / "meta.txt") as f:
        for line in f:
            if "=" in line:
                key, _, value = line.partition("=")
                meta[key.strip()] = value.strip()
    count = int(meta.get("sequences", 0))
    sequences = []
    for index in range(count):
        trajectory = geo.load_trajectory_kitti(directory / "poses" / f"{index:02d}.txt")
        with open(directory / "features" / f"{index:02d}.csv") as f:
            next(f)  # header
            features = np.array(
                [[float(v) for v in line.split(",")] for line in f if line.strip()]
            )
        relatives = np.array(
            [
                geo.pose_to_vector(geo.relative_between(trajectory.poses[k], trajectory.poses[k + 1]))
                for k in range(len(trajectory) - 1)
            ]
        )
        seed = int(meta.get(f"seed_{index:02d}", 0))
        sequences.append(
            Sequence(trajectory=trajectory, relatives=relatives, features=features, seed=seed)
        )
    return sequences, meta
