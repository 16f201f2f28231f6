"""Tour of the SE(3) pose algebra: composition, inversion, trajectories.

Run:  python3 demos/01_pose_composition.py
"""

import math

import numpy as np

from curvo import geometry as geo

# A pose is a translation plus a unit quaternion; build one from Euler angles.
step = geo.euler_to_pose([1.0, 0.0, 0.0], [0.0, 0.0, math.pi / 2])
print("one step forward, then turn left 90 degrees:")
print("  translation:", step.translation)
print("  quaternion (w,x,y,z):", np.round(step.quaternion, 6))

# Composing four of these walks a closed unit square.
square = geo.accumulate([step] * 4)
print("\nwalking four such steps traces a unit square:")
for k, pose in enumerate(square.poses):
    t, r = geo.pose_to_euler(pose)
    print(f"  pose {k}: position {np.round(t, 9)} yaw {math.degrees(r[2]):7.2f} deg")

# inverse() undoes a transform; relative_between() recovers a step.
recovered = geo.relative_between(square.poses[1], square.poses[2])
print("\nrelative transform between poses 1 and 2 recovers the step:")
print("  translation:", np.round(recovered.translation, 9))

# compose_with_jacobians returns 6x6 derivatives of the composition in
# (t, roll, pitch, yaw) coordinates, verified here against finite differences.
rng = np.random.default_rng(0)
a = geo.euler_to_pose(rng.uniform(-1, 1, 3), rng.uniform(-0.5, 0.5, 3))
b = geo.euler_to_pose(rng.uniform(-1, 1, 3), rng.uniform(-0.5, 0.5, 3))
_, jac = geo.compose_with_jacobians(a, b)

step_size = 1e-6
v_left = geo.pose_to_vector(a)
fd = np.zeros((6, 6))
for i in range(6):
    hi, lo = v_left.copy(), v_left.copy()
    hi[i] += step_size
    lo[i] -= step_size
    f_hi = geo.pose_to_vector(geo.compose(geo.vector_to_pose(hi), b))
    f_lo = geo.pose_to_vector(geo.compose(geo.vector_to_pose(lo), b))
    fd[:, i] = (f_hi - f_lo) / (2 * step_size)
err = np.abs(jac.d_out_d_left - fd).max()
print(f"\nanalytic left Jacobian vs central differences: max |diff| = {err:.2e}")
