import math

import numpy as np
import pytest

from curvo import geometry as geo
from curvo import synthdata as sd


def check_consistency(seq, tol=1e-9):
    rebuilt = geo.accumulate([geo.vector_to_pose(r) for r in seq.relatives])
    assert len(rebuilt) == len(seq.trajectory)
    for a, b in zip(rebuilt.poses, seq.trajectory.poses):
        np.testing.assert_allclose(a.translation, b.translation, atol=tol)
        np.testing.assert_allclose(a.quaternion, b.quaternion, atol=tol)


class TestGenerate:
    def test_identity_encoding_features_equal_relatives(self):
        motion = sd.walker_motion()
        fm = sd.FeatureModel.identity()
        seq = sd.generate(motion, fm, length=40, seed=3)
        np.testing.assert_array_equal(seq.features, seq.relatives)

    def test_same_seed_bit_identical(self):
        motion = sd.walker_motion()
        fm = sd.FeatureModel.seeded(8, seed=0, noise_sigma=0.05, nuisance_dim=2)
        a = sd.generate(motion, fm, length=30, seed=7)
        b = sd.generate(motion, fm, length=30, seed=7)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.relatives, b.relatives)

    def test_different_seeds_differ(self):
        motion = sd.walker_motion()
        fm = sd.FeatureModel.identity()
        a = sd.generate(motion, fm, length=30, seed=1)
        b = sd.generate(motion, fm, length=30, seed=2)
        assert not np.array_equal(a.relatives, b.relatives)

    def test_zero_noise_constant_speed_straight_line(self):
        motion = sd.MotionModel(
            dt=0.1,
            speed=sd.OuParams(mean=2.0, reversion=1.0, sigma=0.0),
            roll_rate=sd.OuParams(sigma=0.0),
            pitch_rate=sd.OuParams(sigma=0.0),
            yaw_rate=sd.OuParams(sigma=0.0),
        )
        seq = sd.generate(motion, sd.FeatureModel.identity(), length=10, seed=0)
        expected = np.zeros((10, 6))
        expected[:, 0] = 0.2
        np.testing.assert_allclose(seq.relatives, expected, atol=1e-12)
        np.testing.assert_allclose(seq.trajectory.positions()[:, 0], 0.2 * np.arange(11), atol=1e-12)

    def test_trajectory_consistency_invariant(self):
        for preset in (sd.vehicle_motion(), sd.walker_motion()):
            fm = sd.FeatureModel.seeded(8, seed=1, noise_sigma=0.02, nuisance_dim=2)
            seq = sd.generate(preset, fm, length=120, seed=11)
            check_consistency(seq)

    def test_pitch_stays_clamped(self):
        motion = sd.MotionModel(pitch_rate=sd.OuParams(mean=0.5, reversion=0.1, sigma=0.3))
        seq = sd.generate(motion, sd.FeatureModel.identity(), length=300, seed=5)
        for pose in seq.trajectory.poses:
            _, r = geo.pose_to_euler(pose)
            assert abs(r[1]) <= motion.pitch_clamp + 1e-9

    def test_length_validation(self):
        with pytest.raises(ValueError):
            sd.generate(sd.walker_motion(), sd.FeatureModel.identity(), length=1, seed=0)

    def test_walker_yaw_exceeds_vehicle(self):
        fm = sd.FeatureModel.identity()
        walker = sd.generate(sd.walker_motion(), fm, length=200, seed=9)
        vehicle = sd.generate(sd.vehicle_motion(), fm, length=200, seed=9)
        walker_yaw = np.abs(walker.relatives[:, 5]).mean() / sd.walker_motion().dt
        vehicle_yaw = np.abs(vehicle.relatives[:, 5]).mean() / sd.vehicle_motion().dt
        assert walker_yaw > vehicle_yaw

    def test_zero_noise_least_squares_decode(self):
        fm = sd.FeatureModel.seeded(8, seed=2)
        seq = sd.generate(sd.walker_motion(), fm, length=100, seed=13)
        decode, *_ = np.linalg.lstsq(seq.features, seq.relatives, rcond=None)
        residual = np.linalg.norm(seq.features @ decode - seq.relatives)
        assert residual < 1e-9


class TestFeatureModel:
    def test_rank_enforced(self):
        enc = np.zeros((8, 6))
        enc[:5, :5] = np.eye(5)
        with pytest.raises(ValueError):
            sd.FeatureModel(enc)

    def test_needs_at_least_six_rows(self):
        with pytest.raises(ValueError):
            sd.FeatureModel.seeded(4, seed=0)

    def test_feature_dim_counts_nuisance(self):
        fm = sd.FeatureModel.seeded(8, seed=0, nuisance_dim=3)
        assert fm.feature_dim == 11


class TestMotionModel:
    def test_gimbal_margin_enforced(self):
        with pytest.raises(ValueError):
            sd.MotionModel(pitch_clamp=math.pi / 2 - 0.05)
        with pytest.raises(ValueError):
            sd.MotionModel(dt=0.0)


class TestSampleSubsequences:
    def _sequence(self):
        return sd.generate(
            sd.walker_motion(),
            sd.FeatureModel.seeded(8, seed=4, noise_sigma=0.01),
            length=60,
            seed=21,
        )

    def test_full_length_sample_is_reanchored_copy(self):
        seq = self._sequence()
        (sample,) = sd.sample_subsequences(seq, count=1, min_len=60, max_len=60, seed=0)
        np.testing.assert_array_equal(sample.relatives, seq.relatives)
        np.testing.assert_array_equal(sample.features, seq.features)
        np.testing.assert_allclose(sample.trajectory.poses[0].translation, 0.0, atol=1e-15)
        check_consistency(sample)

    def test_samples_are_contiguous_slices(self):
        seq = self._sequence()
        samples = sd.sample_subsequences(seq, count=10, min_len=5, max_len=20, seed=3)
        assert len(samples) == 10
        for sample in samples:
            length = len(sample)
            assert 5 <= length <= 20
            found = False
            for start in range(len(seq) - length + 1):
                if np.array_equal(seq.relatives[start : start + length], sample.relatives):
                    np.testing.assert_array_equal(
                        seq.features[start : start + length], sample.features
                    )
                    found = True
                    break
            assert found
            check_consistency(sample)

    def test_deterministic(self):
        seq = self._sequence()
        a = sd.sample_subsequences(seq, count=5, min_len=4, max_len=12, seed=9)
        b = sd.sample_subsequences(seq, count=5, min_len=4, max_len=12, seed=9)
        for x, y in zip(a, b):
            assert np.array_equal(x.relatives, y.relatives)

    def test_invalid_range(self):
        seq = self._sequence()
        with pytest.raises(sd.InvalidRangeError):
            sd.sample_subsequences(seq, count=1, min_len=5, max_len=61, seed=0)
        with pytest.raises(sd.InvalidRangeError):
            sd.sample_subsequences(seq, count=1, min_len=0, max_len=5, seed=0)
        with pytest.raises(sd.InvalidRangeError):
            sd.sample_subsequences(seq, count=1, min_len=8, max_len=5, seed=0)


class TestNormalizeFeatures:
    def _dataset(self, noise=0.05):
        fm = sd.FeatureModel.seeded(8, seed=5, noise_sigma=noise, nuisance_dim=1)
        return [
            sd.generate(sd.walker_motion(), fm, length=50, seed=s) for s in (1, 2, 3)
        ]

    def test_zero_mean_after_normalization(self):
        normalized, stats = sd.normalize_features(self._dataset())
        stacked = np.vstack([seq.features for seq in normalized])
        np.testing.assert_allclose(stacked.mean(axis=0), 0.0, atol=1e-9)

    def test_already_zero_mean_unchanged(self):
        normalized, _ = sd.normalize_features(self._dataset())
        again, stats2 = sd.normalize_features(normalized)
        np.testing.assert_allclose(stats2.mean, 0.0, atol=1e-12)
        for before, after in zip(normalized, again):
            np.testing.assert_allclose(before.features, after.features, atol=1e-12)

    def test_constant_channel_becomes_zero(self):
        dataset = self._dataset(noise=0.0)
        boosted = []
        for seq in dataset:
            features = seq.features.copy()
            features[:, -1] = 4.2
            boosted.append(
                sd.Sequence(seq.trajectory, seq.relatives, features, seq.seed)
            )
        normalized, _ = sd.normalize_features(boosted)
        for seq in normalized:
            np.testing.assert_allclose(seq.features[:, -1], 0.0, atol=1e-12)

    def test_stats_reapplied_verbatim(self):
        dataset = self._dataset()
        _, stats = sd.normalize_features(dataset[:2])
        held_out = sd.apply_feature_stats(dataset[2], stats)
        np.testing.assert_allclose(held_out.features, dataset[2].features - stats.mean)


class TestDatasetIo:
    def test_round_trip(self, tmp_path):
        fm = sd.FeatureModel.seeded(8, seed=6, noise_sigma=0.01, nuisance_dim=1)
        sequences = [
            sd.generate(sd.walker_motion(), fm, length=25, seed=s) for s in (4, 5)
        ]
        sd.save_dataset(tmp_path / "data", sequences, {"preset": "walker"})
        loaded, meta = sd.load_dataset(tmp_path / "data")
        assert meta["preset"] == "walker"
        assert len(loaded) == 2
        for orig, back in zip(sequences, loaded):
            np.testing.assert_allclose(back.features, orig.features, atol=1e-12)
            np.testing.assert_allclose(back.relatives, orig.relatives, atol=1e-9)
            assert back.seed == orig.seed
            check_consistency(back)

    def test_layout(self, tmp_path):
        fm = sd.FeatureModel.identity()
        sequences = [
            sd.generate(sd.walker_motion(), fm, length=10, seed=s) for s in (1, 2, 3)
        ]
        sd.save_dataset(tmp_path / "d", sequences, {})
        assert sorted(p.name for p in (tmp_path / "d" / "poses").iterdir()) == [
            "00.txt",
            "01.txt",
            "02.txt",
        ]
        assert sorted(p.name for p in (tmp_path / "d" / "features").iterdir()) == [
            "00.csv",
            "01.csv",
            "02.csv",
        ]
        header = (tmp_path / "d" / "features" / "00.csv").read_text().splitlines()[0]
        assert header.startswith("feat_0,")

    def test_save_is_idempotent(self, tmp_path):
        fm = sd.FeatureModel.identity()
        sequences = [sd.generate(sd.walker_motion(), fm, length=10, seed=1)]
        sd.save_dataset(tmp_path / "a", sequences, {"k": "v"})
        sd.save_dataset(tmp_path / "b", sequences, {"k": "v"})
        for rel in ("poses/00.txt", "features/00.csv", "meta.txt"):
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
