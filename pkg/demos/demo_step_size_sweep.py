"""Sweep the guided planner's sparse step size s over {3, 5, 10} on one
trajectory and report time-to-first-solution and final quality.

Smaller s means more stage-1 sampling before the first guide path; larger s
makes guide paths coarser cost estimators. The sweep is informational; the
sweet spot depends on the robot and trajectory scale.

Run with: python demos/demo_step_size_sweep.py  (takes a few minutes)
"""

import time

import numpy as np

from iktrack import (
    FrameworkConfig,
    Metric,
    generate_bezier,
    preset_chain,
    run_conventional,
    run_guided_anytime,
)

arm = preset_chain("arm_7dof")
traj = generate_bezier(
    np.random.default_rng(2), segments=1, duration=20.0, waypoint_count=200,
    workspace_center=[0.45, 0.0, 0.55], workspace_radius=0.25,
    base_quat=[0, 0, 1, 0], rot_step=0.5,
)

t0 = time.perf_counter()
conv_result, _ = run_conventional(
    arm, traj, FrameworkConfig(metric=Metric.MOVEMENT_ONLY, m=250, seed=2)
)
budget = time.perf_counter() - t0
print(f"conventional baseline: {budget:.1f}s, movement {conv_result.cost.movement:.3f}\n")
print(f"{'s':>4} {'first solution (s)':>20} {'final movement (rad)':>22}")

for s in (3, 5, 10):
    cfg = FrameworkConfig(
        metric=Metric.MOVEMENT_ONLY, seed=2, budget_secs=budget,
        m0=50, md=5, s=s,
    )
    result, trace = run_guided_anytime(arm, traj, cfg)
    print(f"{s:>4} {trace.time_to_first:>20.2f} {result.cost.movement:>22.3f}")
