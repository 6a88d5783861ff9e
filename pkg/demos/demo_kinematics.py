"""Walk through the robot model basics: forward kinematics, the geometric
Jacobian, and tolerance-projected pose residuals.

Run with: python demos/demo_kinematics.py
"""

import numpy as np

from iktrack import (
    Pose,
    ToleranceSpec,
    forward_kinematics,
    jacobian,
    pose_error,
    preset_chain,
)

np.set_printoptions(precision=4, suppress=True)

# --- a planar 3-link arm ----------------------------------------------------

arm = preset_chain("planar_3r")
print(f"loaded {arm.name}: {arm.dof} joints, link lengths {arm.a}")

pose = forward_kinematics(arm, [0.0, 0.0, 0.0])
print(f"\nstraight arm tool position: {pose.position} (all links along x)")

pose = forward_kinematics(arm, [np.pi / 2, 0.0, 0.0])
print(f"base joint at 90 deg:       {pose.position} (the whole arm swings to y)")

# the Jacobian's first column is the lever arm of the base joint
J = jacobian(arm, [0.0, 0.0, 0.0])
print(f"\nJacobian at zero config:\n{J}")
print("column 0 linear part (0, 3, 0): rotating the base sweeps the tip along y")

# --- the 7-DoF arm and tolerances -------------------------------------------

arm7 = preset_chain("arm_7dof")
q = [0.3, 0.6, -0.2, -1.0, 0.4, 0.8, 0.0]
pose = forward_kinematics(arm7, q)
print(f"\n7-DoF arm at a bent config reaches {pose.position}")

# a residual that ignores rotation about the tool's z-axis
free_spin = ToleranceSpec([0, 0, 0, 0, 0, -np.inf], [0, 0, 0, 0, 0, np.inf])
target = Pose(pose.position, [1, 0, 0, 0])
spun = Pose(pose.position, [np.cos(0.6), 0, 0, np.sin(0.6)])  # 1.2 rad about z
print("\nresidual of a tool spun 1.2 rad about its own z-axis:")
print(f"  exact tolerance: {pose_error(spun, target, ToleranceSpec.exact())}")
print(f"  free tool spin:  {pose_error(spun, target, free_spin)}  (absorbed)")
