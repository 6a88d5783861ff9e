"""Track one trajectory with all three planners and compare their
quality-versus-time behavior.

The conventional planner samples everything up front and searches once; the
naive anytime planner grows the graph uniformly; the guided planner finds
coarse guide paths over sparse edges and biases sampling around them.

Run with: python demos/demo_frameworks.py  (takes a minute or two)
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
    run_naive_anytime,
)

arm = preset_chain("arm_7dof")
traj = generate_bezier(
    np.random.default_rng(1), segments=1, duration=20.0, waypoint_count=200,
    workspace_center=[0.45, 0.0, 0.55], workspace_radius=0.25,
    base_quat=[0, 0, 1, 0], rot_step=0.5,
)
print(f"tracking {len(traj)} waypoints with the {arm.dof}-DoF arm\n")

# one-shot conventional run; its completion time becomes the others' budget
t0 = time.perf_counter()
conv_result, conv_trace = run_conventional(
    arm, traj, FrameworkConfig(metric=Metric.MOVEMENT_ONLY, m=250, seed=1)
)
budget = time.perf_counter() - t0
print(f"conventional: first (and only) solution after {budget:5.1f}s, "
      f"movement {conv_result.cost.movement:.3f} rad")

for name, runner, kwargs in (
    ("naive anytime", run_naive_anytime, dict(dm=25)),
    ("guided anytime", run_guided_anytime, dict(m0=50, md=5, s=5)),
):
    cfg = FrameworkConfig(
        metric=Metric.MOVEMENT_ONLY, seed=1, budget_secs=budget, **kwargs
    )
    result, trace = runner(arm, traj, cfg)
    print(f"{name}: first solution after {trace.time_to_first:5.1f}s, "
          f"final movement {result.cost.movement:.3f} rad "
          f"({len(trace.records)} refinements within the matched budget)")

print("\nguided refinement curve (elapsed s -> movement rad):")
_, trace = run_guided_anytime(
    arm, traj,
    FrameworkConfig(metric=Metric.MOVEMENT_ONLY, seed=1, budget_secs=budget,
                    m0=50, md=5, s=5),
)
for r in trace.records[:6]:
    print(f"  {r.elapsed:5.1f}s  {r.cost.movement:.3f}")
if len(trace.records) > 6:
    last = trace.records[-1]
    print(f"  ...\n  {last.elapsed:5.1f}s  {last.cost.movement:.3f}")
