"""Sample diverse IK solutions for a single target pose, uniformly and
around an anchor configuration, and watch duplicates merge.

Run with: python demos/demo_ik_sampling.py
"""

import numpy as np

from iktrack import (
    forward_kinematics,
    preset_chain,
    sample_ik_targeted,
    sample_ik_uniform,
    solve_ik,
)

np.set_printoptions(precision=3, suppress=True)

arm = preset_chain("arm_7dof")
rng = np.random.default_rng(0)

# pick a reachable target by running FK on a random interior config
q_true = rng.uniform(arm.pos_lower, arm.pos_upper) * 0.5
target = forward_kinematics(arm, q_true)
print(f"target position {target.position}, orientation {target.quaternion}")

# a single damped-least-squares solve converges to a solution near its seed
seed = q_true + 0.3
q = solve_ik(arm, target, seed)
print(f"\nsingle solve from a nearby seed converged: {q is not None}, landed "
      f"{np.linalg.norm(q - q_true):.3f} rad from the config behind the target")

# uniform restarts cover distinct solution branches; duplicates are merged
sols = sample_ik_uniform(arm, target, 100, np.random.default_rng(1))
print(f"uniform sampling: 100 seeds -> {sols.shape[0]} distinct solutions")
spread = np.linalg.norm(sols - sols.mean(axis=0), axis=1)
print(f"  joint-space spread around the mean: {spread.min():.2f}..{spread.max():.2f} rad")

# targeted sampling stays near its anchor: useful to densify a known corridor
anchor = sols[0]
near = sample_ik_targeted(arm, target, anchor, 0.2, 50, np.random.default_rng(2))
dist = np.linalg.norm(near - anchor, axis=1)
print(f"\ntargeted sampling around one solution: {near.shape[0]} solutions, "
      f"all within {dist.max():.2f} rad of the anchor")
