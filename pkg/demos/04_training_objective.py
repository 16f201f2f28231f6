"""Anatomy of the objective: step errors, window composites, the rise gate.

Run:  python3 demos/04_training_objective.py
"""

import numpy as np

from curvo import autodiff as ad
from curvo import loss

rng = np.random.default_rng(0)

# Ground-truth relative motions for a short sequence, and noisy estimates.
gt = rng.uniform(-0.3, 0.3, size=(6, 6))
estimates = gt + rng.normal(scale=0.05, size=gt.shape)

tape = ad.Tape()
predictions = [tape.leaf(row.reshape(6, 1)) for row in estimates]

# The per-step term is a weighted squared pose error.
step0 = loss.pose_error(predictions[0], gt[0], delta=1.0, zeta=5.0)
print(f"step-0 pose error: {step0.item():.6f}")

# The window composite chains predictions through SE(3) composition; its
# value is compared against the matching ground-truth span.
window = 2
composed = loss.windowed_compose(predictions[0:2], window)
truth_windows = loss.ground_truth_window_relatives(gt, window)
print("window composite over steps 0-1:", np.round(composed.data.reshape(-1), 4))
print("ground-truth window relative:   ", np.round(truth_windows[1], 4))

# The composite only contributes where its raw value rises vs the previous
# step; falling windows contribute exactly zero (and no gradient).
state = loss.WindowState()
weights = loss.LossWeights(alpha=0.5, delta=1.0, zeta=5.0, window=window)
print("\ngating trace (t, raw window loss, contributed):")
for t in range(window - 1, len(predictions)):
    composed = loss.windowed_compose(predictions[t - window + 1 : t + 1], window)
    term, state = loss.composite_loss(composed, truth_windows[t], state, weights)
    print(f"  t={t}: raw {state.previous_window_loss:.6f} contributed {term.item():.6f}")

# The full objective blends both term families; alpha = 1 turns the
# composite machinery off entirely.
for alpha in (1.0, 0.5, 0.1):
    tape = ad.Tape()
    predictions = [tape.leaf(row.reshape(6, 1)) for row in estimates]
    w = loss.LossWeights(alpha=alpha, delta=1.0, zeta=5.0, window=window)
    total = loss.sequence_loss(predictions, gt, w)
    ad.backward(total)
    grad_norm = float(np.sqrt(sum(np.sum(p.grad**2) for p in predictions)))
    print(f"alpha={alpha:4.2f}: total {total.item():.6f}  |grad| {grad_norm:.4f}")
