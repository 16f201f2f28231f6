import math

import numpy as np
import pytest

from curvo import evaluation as ev
from curvo import geometry as geo


def straight_line(n, step=1.0):
    return geo.accumulate([geo.Pose(translation=[step, 0, 0])] * (n - 1))


def scaled(traj, factor):
    return geo.Trajectory(
        tuple(geo.Pose(p.translation * factor, p.quaternion) for p in traj.poses)
    )


def random_trajectory(rng, n, angle=0.2, step=0.5):
    rels = []
    for _ in range(n - 1):
        t = rng.uniform(0.1, step, size=3) * np.array([1.0, 0.3, 0.1])
        r = rng.uniform(-angle, angle, size=3)
        rels.append(geo.euler_to_pose(t, r))
    return geo.accumulate(rels)


def transform_trajectory(traj, rigid):
    return geo.Trajectory(tuple(geo.compose(rigid, p) for p in traj.poses))


class TestSegmentErrors:
    def test_equal_trajectories_zero(self):
        traj = straight_line(50)
        report = ev.segment_errors(traj, traj, [5, 10, 20])
        assert report.lengths == (5.0, 10.0, 20.0)
        np.testing.assert_allclose(report.trans_err_pct, 0.0, atol=1e-9)
        np.testing.assert_allclose(report.rot_err_deg_per_m, 0.0, atol=1e-9)

    def test_scaled_straight_line_ten_percent(self):
        gt = straight_line(60)
        est = scaled(gt, 0.9)
        report = ev.segment_errors(gt, est, [5, 10, 20, 40])
        assert report.lengths == (5.0, 10.0, 20.0, 40.0)
        for err in report.trans_err_pct:
            assert abs(err - 10.0) < 0.1

    def test_constant_yaw_rate_bias(self):
        # ground truth drives straight; the estimate turns at b deg per meter
        bias_deg_per_m = 0.5
        n, step = 80, 1.0
        gt = straight_line(n, step)
        yaw_step = math.radians(bias_deg_per_m) * step
        est = geo.accumulate([geo.euler_to_pose([step, 0, 0], [0, 0, yaw_step])] * (n - 1))
        report = ev.segment_errors(gt, est, [5, 10, 20])
        for err in report.rot_err_deg_per_m:
            assert abs(err - bias_deg_per_m) < 0.02

    def test_unreachable_lengths_dropped(self):
        gt = straight_line(12)  # 11 meters of path
        report = ev.segment_errors(gt, gt, [5, 500])
        assert report.lengths == (5.0,)

    def test_all_unreachable_raises(self):
        gt = straight_line(5)
        with pytest.raises(ev.SegmentTooLongError):
            ev.segment_errors(gt, gt, [100.0])

    def test_invariant_to_common_rigid_transform(self):
        rng = np.random.default_rng(2)
        gt = random_trajectory(rng, 40)
        est = random_trajectory(rng, 40)
        rigid = geo.euler_to_pose([5.0, -2.0, 1.0], [0.2, 0.1, -0.4])
        base = ev.segment_errors(gt, est, [2, 5])
        moved = ev.segment_errors(
            transform_trajectory(gt, rigid), transform_trajectory(est, rigid), [2, 5]
        )
        np.testing.assert_allclose(base.trans_err_pct, moved.trans_err_pct, atol=1e-9)
        np.testing.assert_allclose(base.rot_err_deg_per_m, moved.rot_err_deg_per_m, atol=1e-9)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ev.segment_errors(straight_line(5), straight_line(6), [1])


class TestRpe:
    def test_equal_trajectories_zero(self):
        rng = np.random.default_rng(3)
        traj = random_trajectory(rng, 30)
        report = ev.rpe(traj, traj)
        assert report.trans_err_pct < 1e-9
        assert report.rot_err_deg < 1e-9
        assert report.skipped_frames == 0

    def test_doubled_translation_is_hundred_percent(self):
        rng = np.random.default_rng(4)
        rels = []
        for _ in range(20):
            t = rng.uniform(0.2, 1.0, size=3)
            r = rng.uniform(-0.2, 0.2, size=3)
            rels.append(geo.euler_to_pose(t, r))
        gt = geo.accumulate(rels)
        doubled = [geo.Pose(rel.translation * 2.0, rel.quaternion) for rel in rels]
        est = geo.accumulate(doubled)
        report = ev.rpe(gt, est)
        assert abs(report.trans_err_pct - 100.0) < 1e-9
        assert report.rot_err_deg < 1e-9

    def test_matches_brute_force_recomputation(self):
        rng = np.random.default_rng(5)
        gt = random_trajectory(rng, 25)
        est = random_trajectory(rng, 25)
        report = ev.rpe(gt, est)

        # brute force via homogeneous matrices
        trans_terms, rot_terms = [], []
        for k in range(24):
            g = np.linalg.inv(gt.poses[k].as_matrix()) @ gt.poses[k + 1].as_matrix()
            e = np.linalg.inv(est.poses[k].as_matrix()) @ est.poses[k + 1].as_matrix()
            d = np.linalg.inv(g) @ e
            angle = math.degrees(
                math.acos(max(-1.0, min(1.0, (np.trace(d[:3, :3]) - 1.0) / 2.0)))
            )
            rot_terms.append(angle)
            denom = np.linalg.norm(g[:3, 3])
            trans_terms.append(np.linalg.norm(d[:3, 3]) / denom * 100.0)
        assert abs(report.trans_err_pct - np.mean(trans_terms)) < 1e-9
        assert abs(report.rot_err_deg - np.mean(rot_terms)) < 1e-9

    def test_degenerate_frames_skipped_and_counted(self):
        poses = [geo.Pose.identity(), geo.Pose.identity(), geo.Pose(translation=[1, 0, 0])]
        gt = geo.Trajectory(tuple(poses))
        report = ev.rpe(gt, gt)
        assert report.skipped_frames == 1
        assert report.frames == 2

    def test_invariant_to_global_transform_of_each(self):
        rng = np.random.default_rng(6)
        gt = random_trajectory(rng, 20)
        est = random_trajectory(rng, 20)
        base = ev.rpe(gt, est)
        rigid_a = geo.euler_to_pose([1, 2, 3], [0.3, -0.2, 0.5])
        rigid_b = geo.euler_to_pose([-4, 0, 2], [0.1, 0.2, -0.3])
        moved = ev.rpe(transform_trajectory(gt, rigid_a), transform_trajectory(est, rigid_b))
        assert abs(base.trans_err_pct - moved.trans_err_pct) < 1e-9
        assert abs(base.rot_err_deg - moved.rot_err_deg) < 1e-9


class TestAte:
    def test_equal_trajectories(self):
        rng = np.random.default_rng(7)
        traj = random_trajectory(rng, 15)
        report = ev.ate(traj, traj)
        assert report.rmse == 0.0
        assert report.cdf_fractions[-1] == 1.0
        np.testing.assert_allclose(report.cdf_values, 0.0)

    def test_uniform_offset(self):
        gt = straight_line(10)
        offset = geo.Pose(translation=[1.0, 0, 0])
        est = geo.Trajectory(
            tuple(geo.Pose(p.translation + [1.0, 0, 0], p.quaternion) for p in gt.poses)
        )
        report = ev.ate(gt, est)
        np.testing.assert_allclose(report.errors, 1.0, atol=1e-12)
        assert abs(report.rmse - 1.0) < 1e-12
        # entire CDF mass jumps at error 1.0
        np.testing.assert_allclose(report.cdf_values, 1.0, atol=1e-12)

    def test_linear_drift_cdf_is_uniform_ramp(self):
        n = 101
        gt = straight_line(n)
        drift = np.linspace(0.0, 1.0, n)
        est = geo.Trajectory(
            tuple(
                geo.Pose(p.translation + [0.0, d, 0.0], p.quaternion)
                for p, d in zip(gt.poses, drift)
            )
        )
        report = ev.ate(gt, est)
        # error at frame k is k/(n-1): the CDF at value v is v (uniform)
        np.testing.assert_allclose(report.cdf_values, np.sort(drift), atol=1e-12)
        np.testing.assert_allclose(
            report.cdf_fractions, np.arange(1, n + 1) / n, atol=1e-12
        )
        assert np.all(np.diff(report.cdf_fractions) > 0)

    def test_cdf_monotone_reaches_one(self):
        rng = np.random.default_rng(8)
        gt = random_trajectory(rng, 30)
        est = random_trajectory(rng, 30)
        report = ev.ate(gt, est)
        assert np.all(np.diff(report.cdf_values) >= 0)
        assert report.cdf_fractions[-1] == 1.0


class TestCsvWriters:
    def test_headers_and_determinism(self, tmp_path):
        gt = straight_line(30)
        est = scaled(gt, 0.9)
        seg = ev.segment_errors(gt, est, [5, 10])
        ev.write_segment_csv(seg, tmp_path / "seg.csv")
        text = (tmp_path / "seg.csv").read_text().splitlines()
        assert text[0] == "length_m,translation_error_pct,rotation_error_deg_per_m,segments"
        assert len(text) == 3

        report = ev.rpe(gt, est)
        ev.write_rpe_csv(report, tmp_path / "rpe.csv")
        assert (tmp_path / "rpe.csv").read_text().startswith("translation_error_pct,")

        ate_report = ev.ate(gt, est)
        ev.write_ate_csv(ate_report, tmp_path / "ate.csv", tmp_path / "cdf.csv")
        assert (tmp_path / "ate.csv").read_text().splitlines()[0] == "frame,position_error_m"
        assert (tmp_path / "cdf.csv").read_text().splitlines()[0] == "error_m,fraction"

        ev.write_segment_csv(seg, tmp_path / "seg2.csv")
        assert (tmp_path / "seg.csv").read_bytes() == (tmp_path / "seg2.csv").read_bytes()
