"""Trajectory accuracy metrics in the KITTI reporting style.

Three views of the same comparison, all computed without any alignment or
scale correction between the two trajectories:

- segment errors: for every start frame, find the frame where the ground-truth
  path length first reaches each requested length L; the relative-pose
  mismatch over that span is reported as translation %% of L and rotation
  degrees per meter, averaged over all spans.
- frame-to-frame errors: mismatch of consecutive-step relatives; translation
  as %% of the true step length (steps under 1e-6 m are skipped and counted),
  rotation as degrees per frame.
- absolute errors: per-frame Euclidean position error plus its empirical CDF.

Rotation mismatch is always the geodesic angle of the error rotation.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from . import geometry as geo

DEGENERATE_MOTION = 1e-6  # meters; frames below this are skipped in rpe
VEHICLE_SEGMENT_LENGTHS = (100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0, 800.0)
WALKER_SEGMENT_LENGTHS = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0)


class SegmentTooLongError(ValueError):
    """No requested segment length fits inside the ground-truth path."""


@dataclass(frozen=True)
class SegmentErrorReport:
    lengths: tuple[float, ...]
    trans_err_pct: tuple[float, ...]  # translation error as % of segment length
    rot_err_deg_per_m: tuple[float, ...]
    segment_counts: tuple[int, ...]

    def mean_trans_pct(self) -> float:
        return float(np.mean(self.trans_err_pct))

    def mean_rot_deg_per_m(self) -> float:
        return float(np.mean(self.rot_err_deg_per_m))


@dataclass(frozen=True)
class RpeReport:
    trans_err_pct: float
    rot_err_deg: float  # per frame
    skipped_frames: int
    frames: int


@dataclass(frozen=True)
class AteReport:
    errors: np.ndarray  # per-frame position error, meters
    rmse: float
    cdf_values: np.ndarray
    cdf_fractions: np.ndarray


def _check_aligned(gt: geo.Trajectory, est: geo.Trajectory) -> None:
    if len(gt) != len(est):
        raise ValueError(f"trajectories differ in length: {len(gt)} vs {len(est)}")


def _path_distances(gt: geo.Trajectory) -> list[float]:
    positions = gt.positions()
    steps = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    distances = [0.0]
    for step in steps:
        distances.append(distances[-1] + float(step))
    return distances


def segment_errors(gt: geo.Trajectory, est: geo.Trajectory, lengths) -> SegmentErrorReport:
    """Average pose drift over all spans of each requested path length.

    For each start frame the end frame is the first whose accumulated
    ground-truth path length reaches L. Requested lengths with no valid span
    are dropped; if none survives, SegmentTooLongError is raised.
    """
    _check_aligned(gt, est)
    distances = _path_distances(gt)
    out_lengths, out_trans, out_rot, out_counts = [], [], [], []
    for length in lengths:
        if length <= 0:
            raise ValueError(f"segment length must be positive, got {length}")
        trans_sum = rot_sum = 0.0
        count = 0
        for start in range(len(gt)):
            end = bisect.bisect_left(distances, distances[start] + length, lo=start + 1)
            if end >= len(gt):
                break
            gt_rel = geo.relative_between(gt.poses[start], gt.poses[end])
            est_rel = geo.relative_between(est.poses[start], est.poses[end])
            mismatch = geo.relative_between(gt_rel, est_rel)
            trans_sum += float(np.linalg.norm(mismatch.translation)) / length * 100.0
            rot_sum += math.degrees(geo.rotation_angle(mismatch)) / length
            count += 1
        if count:
            out_lengths.append(float(length))
            out_trans.append(trans_sum / count)
            out_rot.append(rot_sum / count)
            out_counts.append(count)
    if not out_lengths:
        raise SegmentTooLongError(
            f"no segment of any requested length fits a path of {distances[-1]:.3f} m"
        )
    return SegmentErrorReport(
        tuple(out_lengths), tuple(out_trans), tuple(out_rot), tuple(out_counts)
    )


def rpe(gt: geo.Trajectory, est: geo.Trajectory) -> RpeReport:
    """Frame-to-frame relative-pose mismatch, averaged over the sequence."""
    _check_aligned(gt, est)
    trans_terms, rot_terms = [], []
    skipped = 0
    frames = len(gt) - 1
    for k in range(frames):
        gt_rel = geo.relative_between(gt.poses[k], gt.poses[k + 1])
        est_rel = geo.relative_between(est.poses[k], est.poses[k + 1])
        mismatch = geo.relative_between(gt_rel, est_rel)
        rot_terms.append(math.degrees(geo.rotation_angle(mismatch)))
        motion = float(np.linalg.norm(gt_rel.translation))
        if motion <= DEGENERATE_MOTION:
            skipped += 1
            continue
        trans_terms.append(float(np.linalg.norm(mismatch.translation)) / motion * 100.0)
    return RpeReport(
        trans_err_pct=float(np.mean(trans_terms)) if trans_terms else 0.0,
        rot_err_deg=float(np.mean(rot_terms)) if rot_terms else 0.0,
        skipped_frames=skipped,
        frames=frames,
    )


def ate(gt: geo.Trajectory, est: geo.Trajectory) -> AteReport:
    """Per-frame absolute position error and its empirical CDF."""
    _check_aligned(gt, est)
    errors = np.linalg.norm(gt.positions() - est.positions(), axis=1)
    order = np.sort(errors)
    fractions = np.arange(1, len(order) + 1) / len(order)
    return AteReport(
        errors=errors,
        rmse=float(np.sqrt(np.mean(errors**2))),
        cdf_values=order,
        cdf_fractions=fractions,
    )


# --- CSV report writers -------------------------------------------------------


def write_segment_csv(report: SegmentErrorReport, path) -> None:
    with open(path, "w") as f:
        f.write("length_m,translation_error_pct,rotation_error_deg_per_m,segments\n")
        for row in zip(report.lengths, report.trans_err_pct, report.rot_err_deg_per_m,
                       report.segment_counts):
            f.write(f"{row[0]!r},{row[1]!r},{row[2]!r},{row[3]}\n")


def write_rpe_csv(report: RpeReport, path) -> None:
    with open(path, "w") as f:
        f.write("translation_error_pct,rotation_error_deg_per_frame,skipped_frames,frames\n")
        f.write(
            f"{report.trans_err_pct!r},{report.rot_err_deg!r},"
            f"{report.skipped_frames},{report.frames}\n"
        )


def write_ate_csv(report: AteReport, path, cdf_path=None) -> None:
    with open(path, "w") as f:
        f.write("frame,position_error_m\n")
        for frame, err in enumerate(report.errors):
            f.write(f"{frame},{float(err)!r}\n")
    if cdf_path is not None:
        with open(cdf_path, "w") as f:
            f.write("error_m,fraction\n")
            for value, fraction in zip(report.cdf_values, report.cdf_fractions):
                f.write(f"{float(value)!r},{float(fraction)!r}\n")
