"""Generate random smooth reference trajectories and inspect their
statistics, then round-trip one through the CSV format.

Run with: python demos/demo_trajectories.py
"""

import tempfile
from pathlib import Path

import numpy as np

from iktrack import generate_bezier, load_trajectory, path_stats, save_trajectory

rng = np.random.default_rng(7)

# a gentle single-segment curve, like a short reaching motion
traj = generate_bezier(
    rng, segments=1, duration=10.0, waypoint_count=150,
    workspace_center=[0.45, 0.0, 0.55], workspace_radius=0.25,
    base_quat=[0, 0, 1, 0], rot_step=0.5,
)
length, angular = path_stats(traj)
print(f"1 segment:  {len(traj):4d} waypoints, {length:.2f} m, {angular:.2f} rad")

# chaining more segments with larger orientation steps makes rotation-heavy
# curves; the generator densifies waypoints to keep steps small
heavy = generate_bezier(
    rng, segments=4, duration=14.0, waypoint_count=120,
    workspace_center=[0.45, 0.0, 0.55], workspace_radius=0.22,
    base_quat=[0, 0, 1, 0], rot_step=np.pi,
)
length, angular = path_stats(heavy)
print(f"4 segments: {len(heavy):4d} waypoints, {length:.2f} m, {angular:.2f} rad "
      f"(rotation-heavy, auto-densified)")
dpos, drot = heavy.max_step()
print(f"max per-step change: {dpos:.4f} m, {drot:.4f} rad")

# CSV round trip preserves every waypoint exactly
with tempfile.TemporaryDirectory() as d:
    f = Path(d) / "traj.csv"
    save_trajectory(traj, f)
    back = load_trajectory(f)
    same = np.array_equal(back.positions, traj.positions)
    print(f"\nsaved and re-loaded {f.name}: waypoints identical: {same}")
