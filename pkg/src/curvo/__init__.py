"""curvo: curriculum-trained pose-sequence regression at desk scale.

A numpy library (plus a small CLI) covering: SE(3) pose algebra with analytic
composition Jacobians, a tape-based reverse-mode engine, an LSTM pose
regressor, the window-composite training objective with staged curriculum
schedules, synthetic trajectory/feature generation, and KITTI-style
trajectory metrics.
"""

__version__ = "0.1.0"
