"""Reference-trajectory representation, synthetic generation via chained
cumulative cubic Bezier curves, and CSV I/O.

Positions follow ordinary cubic Beziers; orientations follow the cumulative
form q(u) = q0 * prod_i exp(w_i * Btilde_i(u)) with Btilde the cumulative
Bernstein basis and w_i the log of successive control-quaternion steps, which
endpoint-interpolates the first and last control quaternions exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kinematics import (
    Pose,
    quat_angle,
    quat_conjugate,
    quat_exp,
    quat_log,
    quat_multiply,
    quat_normalize,
)

__all__ = [
    "Waypoint",
    "Trajectory",
    "TrajectoryLoadError",
    "generate_bezier",
    "path_stats",
    "load_trajectory",
    "save_trajectory",
    "bezier_positions",
    "bezier_orientations",
    "MAX_POS_STEP",
    "MAX_ROT_STEP",
]

# waypoint density assumed by the planners: max pose change per step
MAX_POS_STEP = 0.05
MAX_ROT_STEP = 0.1

CSV_HEADER = "t,x,y,z,qw,qx,qy,qz"
QUAT_FILE_TOL = 1e-6


class TrajectoryLoadError(ValueError):
    """Raised when a trajectory file is malformed or violates invariants."""


@dataclass(frozen=True)
class Waypoint:
    t: float
    pose: Pose


class Trajectory:
    """Timestamped sequence of target tool poses.

    Stored as arrays: times (n,), positions (n, 3), quaternions (n, 4).
    Timestamps must be finite, non-negative, and strictly increasing, with at
    least two waypoints. Step density against MAX_POS_STEP / MAX_ROT_STEP is
    guaranteed for generated trajectories and checkable via validate_density.
    """

    def __init__(self, times, positions, quaternions):
        times = np.asarray(times, dtype=float).reshape(-1)
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        quaternions = np.asarray(quaternions, dtype=float).reshape(-1, 4)
        n = times.shape[0]
        if n < 2:
            raise ValueError("trajectory needs at least two waypoints")
        if positions.shape[0] != n or quaternions.shape[0] != n:
            raise ValueError("times, positions, quaternions must have equal length")
        if not np.all(np.isfinite(times)) or times[0] < 0.0:
            raise ValueError("timestamps must be finite and non-negative")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("timestamps must be strictly increasing")
        self.times = times
        self.positions = positions
        self.quaternions = quat_normalize(quaternions)

    @classmethod
    def from_waypoints(cls, waypoints) -> "Trajectory":
        return cls(
            [w.t for w in waypoints],
            [w.pose.position for w in waypoints],
            [w.pose.quaternion for w in waypoints],
        )

    def __len__(self) -> int:
        return self.times.shape[0]

    def pose(self, i: int) -> Pose:
        return Pose(self.positions[i], self.quaternions[i])

    @property
    def waypoints(self) -> list[Waypoint]:
        return [Waypoint(float(self.times[i]), self.pose(i)) for i in range(len(self))]

    def delta_t(self, x: int, x2: int) -> float:
        return float(self.times[x2] - self.times[x])

    def max_step(self) -> tuple[float, float]:
        """Largest consecutive position / rotation change."""
        dpos = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        rel = quat_multiply(quat_conjugate(self.quaternions[:-1]), self.quaternions[1:])
        drot = quat_angle(rel)
        return float(dpos.max()), float(drot.max())

    def validate_density(self, pos_step: float = MAX_POS_STEP, rot_step: float = MAX_ROT_STEP):
        dpos, drot = self.max_step()
        if dpos > pos_step or drot > rot_step:
            raise ValueError(
                f"waypoints too sparse: max step {dpos:.4f} m / {drot:.4f} rad "
                f"exceeds {pos_step} m / {rot_step} rad"
            )
        return self


# ---------------------------------------------------------------------------
# Bezier evaluation
# ---------------------------------------------------------------------------

def _segment_params(n_segments: int, u: np.ndarray):
    u = np.asarray(u, dtype=float)
    seg = np.minimum((u * n_segments).astype(int), n_segments - 1)
    return seg, u * n_segments - seg


def bezier_positions(ctrl: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate chained cubic Beziers. ctrl is (S, 4, 3); u in [0, 1] global."""
    ctrl = np.asarray(ctrl, dtype=float)
    seg, lu = _segment_params(ctrl.shape[0], u)
    v = 1.0 - lu
    basis = np.stack([v**3, 3 * lu * v**2, 3 * lu**2 * v, lu**3], axis=-1)
    return (ctrl[seg] * basis[..., None]).sum(axis=1)


def bezier_orientations(ctrl_q: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Evaluate chained cumulative cubic quaternion Beziers.

    ctrl_q is (S, 4, 4) unit quaternions per segment; returns (m, 4) canonical
    quaternions. Relative steps between control quaternions are principal
    (angle <= pi), so the log maps stay well defined.
    """
    ctrl_q = quat_normalize(np.asarray(ctrl_q, dtype=float))
    seg, lu = _segment_params(ctrl_q.shape[0], u)
    omega = quat_log(quat_multiply(quat_conjugate(ctrl_q[:, :-1]), ctrl_q[:, 1:]))  # (S, 3, 3)
    v = 1.0 - lu
    # cumulative Bernstein basis: Btilde_i = sum_{j>=i} B_j
    b1 = 3 * lu * v**2 + 3 * lu**2 * v + lu**3
    b2 = 3 * lu**2 * v + lu**3
    b3 = lu**3
    q = ctrl_q[seg, 0]
    for i, b in enumerate((b1, b2, b3)):
        q = quat_multiply(q, quat_exp(omega[seg, i] * b[:, None]))
    return quat_normalize(q)


def _uniform_in_ball(rng: np.random.Generator, n: int, center, radius: float) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1.0 / 3.0)
    return np.asarray(center, dtype=float) + v * r


def _random_rot_step(rng: np.random.Generator, max_angle: float) -> np.ndarray:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    return quat_exp(axis * rng.uniform(0.0, max_angle))


def _draw_controls(rng, segments, center, radius, base_quat=None, rot_step=0.5):
    """Control points/quaternions for chained segments, C1 at the joins.

    Control quaternions perform a random walk from base_quat with per-step
    rotation angles up to rot_step.
    """
    base = np.array([1.0, 0, 0, 0]) if base_quat is None else quat_normalize(base_quat)
    ctrl_p = np.empty((segments, 4, 3))
    ctrl_q = np.empty((segments, 4, 4))
    ctrl_p[0] = _uniform_in_ball(rng, 4, center, radius)
    ctrl_q[0, 0] = quat_multiply(base, _random_rot_step(rng, rot_step))
    for i in range(1, 4):
        ctrl_q[0, i] = quat_multiply(ctrl_q[0, i - 1], _random_rot_step(rng, rot_step))
    for s in range(1, segments):
        ctrl_p[s, 0] = ctrl_p[s - 1, 3]
        ctrl_p[s, 1] = 2.0 * ctrl_p[s - 1, 3] - ctrl_p[s - 1, 2]  # mirrored tangent
        ctrl_p[s, 2:] = _uniform_in_ball(rng, 2, center, radius)
        prev_step = quat_multiply(quat_conjugate(ctrl_q[s - 1, 2]), ctrl_q[s - 1, 3])
        ctrl_q[s, 0] = ctrl_q[s - 1, 3]
        ctrl_q[s, 1] = quat_multiply(ctrl_q[s - 1, 3], quat_normalize(prev_step))
        for i in (2, 3):
            ctrl_q[s, i] = quat_multiply(ctrl_q[s, i - 1], _random_rot_step(rng, rot_step))
    return ctrl_p, quat_normalize(ctrl_q)


def generate_bezier(
    rng: np.random.Generator,
    segments: int,
    duration: float,
    waypoint_count: int,
    workspace_center,
    workspace_radius: float,
    base_quat=None,
    rot_step: float = 0.5,
) -> Trajectory:
    """Random smooth trajectory: chained cubic position Beziers (C1 joins,
    control points uniform in the workspace ball) and cumulative cubic
    quaternion Beziers, sampled at uniform timestamps over [0, duration].

    Orientation controls walk away from base_quat with per-step angles up to
    rot_step (rotation-heavy trajectories use steps up to pi). The waypoint
    count is increased automatically if the requested count would violate the
    step-density bounds.
    """
    if segments < 1:
        raise ValueError("segments must be >= 1")
    if waypoint_count < 2:
        raise ValueError("waypoint_count must be >= 2")
    if duration <= 0:
        raise ValueError("duration must be positive")
    if rot_step < 0:
        raise ValueError("rot_step must be >= 0")
    ctrl_p, ctrl_q = _draw_controls(
        rng, segments, workspace_center, workspace_radius, base_quat, rot_step
    )
    m = int(waypoint_count)
    for _ in range(32):
        u = np.linspace(0.0, 1.0, m)
        traj = Trajectory(
            u * duration, bezier_positions(ctrl_p, u), bezier_orientations(ctrl_q, u)
        )
        dpos, drot = traj.max_step()
        if dpos <= MAX_POS_STEP and drot <= MAX_ROT_STEP:
            return traj
        factor = max(dpos / MAX_POS_STEP, drot / MAX_ROT_STEP)
        m = int(np.ceil((m - 1) * factor * 1.1)) + 1
    raise RuntimeError("could not densify trajectory to the step bounds")


def path_stats(traj: Trajectory) -> tuple[float, float]:
    """(total path length in meters, total angular displacement in radians)."""
    length = float(np.linalg.norm(np.diff(traj.positions, axis=0), axis=1).sum())
    rel = quat_multiply(quat_conjugate(traj.quaternions[:-1]), traj.quaternions[1:])
    angular = float(quat_angle(rel).sum())
    return length, angular


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------

def save_trajectory(traj: Trajectory, path) -> None:
    lines = [CSV_HEADER]
    for i in range(len(traj)):
        vals = [traj.times[i], *traj.positions[i], *traj.quaternions[i]]
        lines.append(",".join(f"{v:.17g}" for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def load_trajectory(path) -> Trajectory:
    path = Path(path)
    try:
        lines = path.read_text().strip().splitlines()
    except OSError as exc:
        raise TrajectoryLoadError(f"cannot read trajectory file {path}: {exc}") from exc
    if not lines or lines[0].strip() != CSV_HEADER:
        raise TrajectoryLoadError(f"expected header {CSV_HEADER!r}")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 8:
            raise TrajectoryLoadError(f"line {ln}: expected 8 fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise TrajectoryLoadError(f"line {ln}: {exc}") from exc
    data = np.asarray(rows, dtype=float)
    if data.shape[0] < 2:
        raise TrajectoryLoadError("trajectory needs at least two waypoints")
    quats = data[:, 4:8]
    norms = np.linalg.norm(quats, axis=1)
    if np.any(np.abs(norms - 1.0) > QUAT_FILE_TOL):
        raise TrajectoryLoadError("quaternion norm deviates from 1 by more than 1e-6")
    try:
        return Trajectory(data[:, 0], data[:, 1:4], quats)
    except ValueError as exc:
        raise TrajectoryLoadError(str(exc)) from exc
