"""The training objective: per-step pose error, the differentiable window
composition layer, the rise-gated composite term, and their alpha blend.

A prediction is a 6x1 column (t, r). The window composite chains the last w
step predictions through SE(3) composition in chronological order (the step
w frames back is applied first), so with perfect predictions it reproduces
the ground-truth pose of frame t relative to frame t-w. Gradients flow
through the chain via the analytic composition Jacobians spliced into the
tape, not by tracing the quaternion arithmetic.

The composite term at step t contributes only when its raw value exceeds the
previous step's raw value (strictly); otherwise it contributes an exact zero
with no gradient. The comparison itself never carries gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from . import geometry as geo


class InsufficientHistoryError(ValueError):
    """A window composite was requested with fewer predictions than the window."""


@dataclass(frozen=True)
class LossWeights:
    """Full parameterization of the objective: blend, term weights, window."""

    alpha: float = 1.0
    delta: float = 1.0
    zeta: float = 1.0
    window: int = 2

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.delta < 0 or self.zeta < 0:
            raise ValueError("delta and zeta must be non-negative")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")

    def term_weights(self) -> np.ndarray:
        return np.array([self.delta] * 3 + [self.zeta] * 3).reshape(6, 1)


@dataclass(frozen=True)
class WindowState:
    """Raw window loss from the previous step; None before the first window."""

    previous_window_loss: float | None = None


def pose_error(estimate: ad.Value, truth, delta: float, zeta: float) -> ad.Value:
    """delta*||t_hat - t||^2 + zeta*||r_hat - r||^2 as a differentiable scalar."""
    truth = np.asarray(truth, dtype=np.float64).reshape(6, 1)
    if estimate.shape != (6, 1):
        raise ad.ShapeMismatchError("pose_error", estimate.shape, (6, 1))
    tape = estimate.tape
    diff = ad.add(estimate, tape.constant(-truth))
    weights = tape.constant(np.array([delta] * 3 + [zeta] * 3).reshape(6, 1))
    return ad.sum(ad.mul_elementwise(weights, ad.square(diff)))


def pose_error_value(estimate6: np.ndarray, truth6: np.ndarray, delta: float, zeta: float) -> float:
    """Plain-number version of pose_error for gating decisions and metrics."""
    diff = np.asarray(estimate6, float).reshape(6) - np.asarray(truth6, float).reshape(6)
    return float(delta * np.dot(diff[:3], diff[:3]) + zeta * np.dot(diff[3:], diff[3:]))


def windowed_compose(relatives: list[ad.Value], window: int) -> ad.Value:
    """Chain exactly ``window`` predicted relatives into the window composite.

    ``relatives`` is in chronological order (oldest first); the result is the
    pose of the newest frame relative to the frame ``window`` steps earlier.
    The returned Value carries one chained 6x6 Jacobian per input.
    """
    if len(relatives) < window:
        raise InsufficientHistoryError(
            f"window of {window} needs {window} predictions, got {len(relatives)}"
        )
    if len(relatives) != window:
        raise ValueError(f"expected exactly {window} predictions, got {len(relatives)}")
    poses = [geo.vector_to_pose(v.data.reshape(6)) for v in relatives]
    acc = poses[0]
    jacobians = [np.eye(6)]
    for pose in poses[1:]:
        acc, jac = geo.compose_with_jacobians(acc, pose)
        jacobians = [jac.d_out_d_left @ j for j in jacobians]
        jacobians.append(jac.d_out_d_right)
    composed = geo.pose_to_vector(acc).reshape(6, 1)
    return ad.splice_external(relatives, composed, jacobians)


def composite_loss(
    composed: ad.Value,
    truth_window_relative,
    state: WindowState,
    weights: LossWeights,
) -> tuple[ad.Value, WindowState]:
    """Gate the window loss on rising raw value; always roll the state forward.

    Contributes pose_error(composed, truth) when the raw window loss exceeds
    the previous step's raw loss (or when there is no previous step); an exact
    zero constant otherwise. The new state carries the raw loss regardless.
    """
    truth = np.asarray(truth_window_relative, dtype=np.float64).reshape(6)
    raw = pose_error_value(composed.data, truth, weights.delta, weights.zeta)
    gate_open = state.previous_window_loss is None or raw > state.previous_window_loss
    if gate_open:
        contribution = pose_error(composed, truth, weights.delta, weights.zeta)
    else:
        contribution = composed.tape.constant(np.zeros((1, 1)))
    return contribution, WindowState(previous_window_loss=raw)


def bounded_total(rel_losses: list[ad.Value], com_losses: list[ad.Value], alpha: float) -> ad.Value:
    """alpha * sum(relative terms) + (1 - alpha) * sum(composite terms)."""
    if len(rel_losses) != len(com_losses):
        raise ad.ShapeMismatchError("bounded_total", len(rel_losses), len(com_losses))

    def fold(values):
        total = values[0]
        for v in values[1:]:
            total = ad.add(total, v)
        return total

    total = ad.scale(fold(rel_losses), alpha)
    if alpha < 1.0:
        total = ad.add(total, ad.scale(fold(com_losses), 1.0 - alpha))
    return total


def ground_truth_window_relatives(gt_relatives: np.ndarray, window: int) -> np.ndarray:
    """(T, 6) of the truth pose of frame t relative to frame t-window.

    Rows before index window-1 are zero placeholders (no full window yet).
    """
    gt_relatives = np.asarray(gt_relatives, dtype=np.float64)
    out = np.zeros_like(gt_relatives)
    poses = [geo.vector_to_pose(row) for row in gt_relatives]
    for t in range(window - 1, len(poses)):
        acc = poses[t - window + 1]
        for k in range(t - window + 2, t + 1):
            acc = geo.compose(acc, poses[k])
        out[t] = geo.pose_to_vector(acc)
    return out


def sequence_loss(
    predictions: list[ad.Value],
    gt_relatives: np.ndarray,
    weights: LossWeights,
) -> ad.Value:
    """Assemble the full objective over a predicted sequence.

    Per-step relative terms run over every step; composite terms start at the
    first step with a full window and pass through the rising-value gate. At
    alpha = 1 the composite machinery is skipped entirely, which keeps the
    result bit-identical to a composite-free sum of the relative terms.
    """
    gt_relatives = np.asarray(gt_relatives, dtype=np.float64)
    steps = len(predictions)
    if steps < 1:
        raise ValueError("sequence_loss needs at least one prediction")
    if gt_relatives.shape != (steps, 6):
        raise ad.ShapeMismatchError("sequence_loss", gt_relatives.shape, (steps, 6))
    tape = predictions[0].tape

    rel_losses = [
        pose_error(predictions[t], gt_relatives[t], weights.delta, weights.zeta)
        for t in range(steps)
    ]
    if weights.alpha >= 1.0:
        return bounded_total(rel_losses, [tape.constant(np.zeros((1, 1)))] * steps, 1.0)

    window = weights.window
    truth_windows = ground_truth_window_relatives(gt_relatives, window)
    com_losses: list[ad.Value] = []
    state = WindowState()
    for t in range(steps):
        if t < window - 1:
            com_losses.append(tape.constant(np.zeros((1, 1))))
            continue
        composed = windowed_compose(predictions[t - window + 1 : t + 1], window)
        term, state = composite_loss(composed, truth_windows[t], state, weights)
        com_losses.append(term)
    return bounded_total(rel_losses, com_losses, weights.alpha)
