"""Serial revolute-chain model: DH-table forward kinematics, geometric
Jacobian, tolerance-aware pose residuals, and robot-definition loading.

All quaternions are (w, x, y, z), unit norm, canonicalized to w >= 0.
Batch variants operate on stacked configurations (B, k) and are the
workhorses for the samplers; the single-config functions wrap them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Pose",
    "ToleranceSpec",
    "KinematicChain",
    "ChainLoadError",
    "forward_kinematics",
    "forward_kinematics_batch",
    "jacobian",
    "jacobian_batch",
    "pose_error",
    "pose_error_batch",
    "load_chain",
    "chain_from_dict",
    "preset_chain",
    "preset_path",
    "quat_multiply",
    "quat_conjugate",
    "quat_normalize",
    "quat_rotate",
    "quat_log",
    "quat_exp",
    "quat_angle",
    "quat_from_matrix",
    "matrix_from_quat",
]

QUAT_NORM_TOL = 1e-6


# ---------------------------------------------------------------------------
# quaternion utilities (batch-friendly, shapes (..., 4) / (..., 3))
# ---------------------------------------------------------------------------

def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Normalize to unit norm and canonicalize the sign so w >= 0."""
    q = np.asarray(q, dtype=float)
    out = q / np.linalg.norm(q, axis=-1, keepdims=True)
    w = out[..., 0]
    flip = w < 0.0
    if out.ndim == 1:
        if flip:
            out = -out
        elif w == 0.0:
            out = out * _zero_w_sign(out)
    else:
        out = np.where(flip[..., None], -out, out)
        zero = w == 0.0
        if np.any(zero):
            sign = np.apply_along_axis(_zero_w_sign, -1, out[zero])
            out[zero] *= sign[..., None]
    return out


def _zero_w_sign(q: np.ndarray) -> float:
    # w == 0 leaves q / -q ambiguous; make the first nonzero component positive
    for c in q[1:]:
        if c != 0.0:
            return 1.0 if c > 0.0 else -1.0
    return 1.0


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vectors v (..., 3) by quaternions q (..., 4)."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    u = q[..., 1:]
    w = q[..., :1]
    uv = np.cross(u, v)
    return v + 2.0 * (w * uv + np.cross(u, uv))


def quat_angle(q: np.ndarray) -> np.ndarray:
    """Rotation angle in [0, pi] for canonicalized quaternions."""
    q = np.asarray(q, dtype=float)
    s = np.linalg.norm(q[..., 1:], axis=-1)
    return 2.0 * np.arctan2(s, np.abs(q[..., 0]))


def quat_log(q: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle) of q; angle in [0, pi]."""
    q = np.asarray(q, dtype=float)
    w = np.abs(q[..., 0])
    sign = np.where(q[..., 0] < 0.0, -1.0, 1.0)
    v = q[..., 1:] * sign[..., None]
    s = np.linalg.norm(v, axis=-1)
    angle = 2.0 * np.arctan2(s, w)
    small = s < 1e-12
    with np.errstate(invalid="ignore", divide="ignore"):
        scale = np.where(small, 2.0, angle / np.where(small, 1.0, s))
    return v * scale[..., None]


def quat_exp(rotvec: np.ndarray) -> np.ndarray:
    """Quaternion exp of a rotation vector (..., 3)."""
    rotvec = np.asarray(rotvec, dtype=float)
    theta = np.linalg.norm(rotvec, axis=-1)
    half = 0.5 * theta
    small = theta < 1e-12
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(small, 0.5 - theta**2 / 48.0, np.sin(half) / np.where(small, 1.0, theta))
    w = np.cos(half)
    return np.concatenate([w[..., None], rotvec * k[..., None]], axis=-1)


def matrix_from_quat(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    row0 = np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1)
    row1 = np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1)
    row2 = np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1)
    return np.stack([row0, row1, row2], axis=-2)


def quat_from_matrix(R: np.ndarray) -> np.ndarray:
    """Quaternion (w,x,y,z) from rotation matrices (..., 3, 3), canonicalized."""
    R = np.asarray(R, dtype=float)
    m00, m01, m02 = R[..., 0, 0], R[..., 0, 1], R[..., 0, 2]
    m10, m11, m12 = R[..., 1, 0], R[..., 1, 1], R[..., 1, 2]
    m20, m21, m22 = R[..., 2, 0], R[..., 2, 1], R[..., 2, 2]
    tr = m00 + m11 + m22
    # pick the numerically largest pivot per matrix (Shepperd)
    cand = np.stack([tr, m00, m11, m22], axis=-1)
    case = cand.argmax(axis=-1)
    tiny = 1e-30
    s0 = 2.0 * np.sqrt(np.maximum(1.0 + tr, tiny))
    q0 = np.stack([0.25 * s0, (m21 - m12) / s0, (m02 - m20) / s0, (m10 - m01) / s0], -1)
    s1 = 2.0 * np.sqrt(np.maximum(1.0 + m00 - m11 - m22, tiny))
    q1 = np.stack([(m21 - m12) / s1, 0.25 * s1, (m01 + m10) / s1, (m02 + m20) / s1], -1)
    s2 = 2.0 * np.sqrt(np.maximum(1.0 + m11 - m00 - m22, tiny))
    q2 = np.stack([(m02 - m20) / s2, (m01 + m10) / s2, 0.25 * s2, (m12 + m21) / s2], -1)
    s3 = 2.0 * np.sqrt(np.maximum(1.0 + m22 - m00 - m11, tiny))
    q3 = np.stack([(m10 - m01) / s3, (m02 + m20) / s3, (m12 + m21) / s3, 0.25 * s3], -1)
    stacked = np.stack([q0, q1, q2, q3], axis=-2)
    q = np.take_along_axis(stacked, case[..., None, None].repeat(4, -1), axis=-2)[..., 0, :]
    return quat_normalize(q)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pose:
    """Rigid pose: position in meters, unit quaternion (w, x, y, z)."""

    position: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float).reshape(3)
        q = np.asarray(self.quaternion, dtype=float).reshape(4)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "quaternion", quat_normalize(q))

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]))

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = matrix_from_quat(self.quaternion)
        T[:3, 3] = self.position
        return T

    def compose(self, other: "Pose") -> "Pose":
        return Pose(
            self.position + quat_rotate(self.quaternion, other.position),
            quat_multiply(self.quaternion, other.quaternion),
        )


@dataclass(frozen=True)
class ToleranceSpec:
    """Per-axis allowed deviation of the tool frame from the target frame.

    Axis order: (tx, ty, tz) meters, (rx, ry, rz) radians, expressed in the
    target's tool frame. An axis with lower=-inf, upper=+inf is fully free.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(6)
        hi = np.asarray(self.upper, dtype=float).reshape(6)
        if np.any(lo > 0.0) or np.any(hi < 0.0):
            raise ValueError("tolerance must satisfy lower <= 0 <= upper on every axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def exact(cls) -> "ToleranceSpec":
        return cls(np.zeros(6), np.zeros(6))

    def clamp(self, raw: np.ndarray) -> np.ndarray:
        """Zero inside the bounds, signed overshoot outside."""
        raw = np.asarray(raw, dtype=float)
        low = raw < self.lower
        high = raw > self.upper
        out = np.zeros_like(raw)
        out = np.where(low, raw - self.lower, out)
        out = np.where(high, raw - self.upper, out)
        return out


@dataclass(frozen=True)
class KinematicChain:
    """Serial revolute chain described by a DH table.

    Per-joint transform: Rz(theta_i + offset_i) @ Tz(d_i) @ Tx(a_i) @ Rx(alpha_i),
    chained base to tip, then the fixed tool transform.
    """

    name: str
    a: np.ndarray
    alpha: np.ndarray
    d: np.ndarray
    theta_offset: np.ndarray
    pos_lower: np.ndarray
    pos_upper: np.ndarray
    vel_max: np.ndarray
    tool_transform: Pose = field(default_factory=Pose.identity)
    tolerance: ToleranceSpec = field(default_factory=ToleranceSpec.exact)

    def __post_init__(self):
        k = len(np.atleast_1d(self.a))
        for name in ("a", "alpha", "d", "theta_offset", "pos_lower", "pos_upper", "vel_max"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(k)
            object.__setattr__(self, name, arr)
        if k < 1:
            raise ValueError("chain needs at least one joint")
        if np.any(self.vel_max <= 0.0):
            raise ValueError("velocity limits must be strictly positive")
        if np.any(self.pos_lower >= self.pos_upper):
            raise ValueError("position limits must satisfy lower < upper")
        # constant tail of each joint transform: Tz(d) Tx(a) Rx(alpha)
        const = np.zeros((k, 4, 4))
        ca, sa = np.cos(self.alpha), np.sin(self.alpha)
        const[:, 0, 0] = 1.0
        const[:, 0, 3] = self.a
        const[:, 1, 1] = ca
        const[:, 1, 2] = -sa
        const[:, 2, 1] = sa
        const[:, 2, 2] = ca
        const[:, 2, 3] = self.d
        const[:, 3, 3] = 1.0
        object.__setattr__(self, "_link_const", const)
        object.__setattr__(self, "_tool_matrix", self.tool_transform.matrix())

    @property
    def dof(self) -> int:
        return self.a.shape[0]

    def mid_config(self) -> np.ndarray:
        return 0.5 * (self.pos_lower + self.pos_upper)

    def clip_to_limits(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.pos_lower, self.pos_upper)

    def within_limits(self, q: np.ndarray) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.pos_lower) and np.all(q <= self.pos_upper))


# ---------------------------------------------------------------------------
# forward kinematics and Jacobian
# ---------------------------------------------------------------------------

def _check_config(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != chain.dof:
        raise ValueError(f"config has {q.shape[0]} joints, chain expects {chain.dof}")
    return q


def chain_frames(chain: KinematicChain, Q: np.ndarray):
    """Tool frames plus per-joint origins and z-axes for a config batch.

    Returns (R (B,3,3), p (B,3), origins (B,k,3), axes (B,k,3)): tool rotation
    and position including the tool transform, and each joint's rotation axis
    and origin in the base frame.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[1] != chain.dof:
        raise ValueError(f"expected batch shape (B, {chain.dof}), got {Q.shape}")
    B, k = Q.shape
    theta = Q + chain.theta_offset
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(chain.alpha), np.sin(chain.alpha)
    # per-joint rotation Rz(theta) @ Rx(alpha) and translation Rz(theta) @ (a,0,d)
    M = np.empty((B, k, 3, 3))
    M[..., 0, 0] = ct
    M[..., 0, 1] = -st * ca
    M[..., 0, 2] = st * sa
    M[..., 1, 0] = st
    M[..., 1, 1] = ct * ca
    M[..., 1, 2] = -ct * sa
    M[..., 2, 0] = 0.0
    M[..., 2, 1] = sa
    M[..., 2, 2] = ca
    t = np.empty((B, k, 3))
    t[..., 0] = chain.a * ct
    t[..., 1] = chain.a * st
    t[..., 2] = chain.d
    R = np.broadcast_to(np.eye(3), (B, 3, 3)).copy()
    p = np.zeros((B, 3))
    origins = np.empty((B, k, 3))
    axes = np.empty((B, k, 3))
    for i in range(k):
        origins[:, i] = p
        axes[:, i] = R[:, :, 2]
        p = p + (R @ t[:, i, :, None])[:, :, 0]
        R = R @ M[:, i]
    tool = chain._tool_matrix
    p = p + (R @ tool[:3, 3])
    R = R @ tool[:3, :3]
    return R, p, origins, axes


def forward_kinematics_batch(chain: KinematicChain, Q: np.ndarray):
    """Tool poses for a batch of configs: (positions (B,3), quaternions (B,4))."""
    R, p, _, _ = chain_frames(chain, Q)
    return p, quat_from_matrix(R)


def forward_kinematics(chain: KinematicChain, q: np.ndarray) -> Pose:
    """Tool-frame pose of the chain at configuration q."""
    q = _check_config(chain, q)
    pos, quat = forward_kinematics_batch(chain, q[None, :])
    return Pose(pos[0], quat[0])


def _jacobian_from_frames(p_ee: np.ndarray, origins: np.ndarray, axes: np.ndarray) -> np.ndarray:
    lin = np.cross(axes, p_ee[:, None, :] - origins)
    return np.concatenate([lin.transpose(0, 2, 1), axes.transpose(0, 2, 1)], axis=1)


def jacobian_batch(chain: KinematicChain, Q: np.ndarray) -> np.ndarray:
    """Geometric Jacobians (B, 6, k): tool linear then angular velocity, base frame."""
    _, p, origins, axes = chain_frames(chain, Q)
    return _jacobian_from_frames(p, origins, axes)


def jacobian(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    q = _check_config(chain, q)
    return jacobian_batch(chain, q[None, :])[0]


# ---------------------------------------------------------------------------
# pose residual with tolerance projection
# ---------------------------------------------------------------------------

def _pose_residual(
    positions: np.ndarray,
    quaternions: np.ndarray,
    t_pos: np.ndarray,
    t_quat: np.ndarray,
    R_t: np.ndarray,
    tol: ToleranceSpec,
) -> np.ndarray:
    """Tolerance-projected residuals; target arrays broadcast against the batch."""
    dp = np.matmul(R_t.swapaxes(-1, -2), (positions - t_pos)[..., None])[..., 0]
    q_rel = quat_normalize(quat_multiply(quat_conjugate(t_quat), quaternions))
    rot = quat_log(q_rel)
    return tol.clamp(np.concatenate([dp, rot], axis=-1))


def pose_error_batch(
    positions: np.ndarray,
    quaternions: np.ndarray,
    target: Pose,
    tol: ToleranceSpec,
) -> np.ndarray:
    """Tolerance-projected 6-vector residuals, expressed in the target tool frame.

    Raw residual: position difference rotated into the target frame, then the
    axis-angle of the relative rotation. Components inside [lower, upper] are
    zeroed; outside, the signed distance to the nearer bound remains.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    quaternions = np.atleast_2d(np.asarray(quaternions, dtype=float))
    R_t = matrix_from_quat(target.quaternion)
    return _pose_residual(positions, quaternions, target.position, target.quaternion, R_t, tol)


def pose_error(current: Pose, target: Pose, tol: ToleranceSpec) -> np.ndarray:
    """Tolerance-projected residual of `current` relative to `target`."""
    return pose_error_batch(current.position[None, :], current.quaternion[None, :], target, tol)[0]


# ---------------------------------------------------------------------------
# robot-definition files
# ---------------------------------------------------------------------------

class ChainLoadError(ValueError):
    """Raised when a robot-definition file is malformed or violates invariants."""


def _parse_bound(value) -> float:
    if isinstance(value, str):
        if value == "inf":
            return math.inf
        if value == "-inf":
            return -math.inf
        raise ChainLoadError(f"invalid tolerance bound {value!r}")
    return float(value)


def chain_from_dict(data: dict) -> KinematicChain:
    """Build and validate a chain from the robot-definition dict layout."""
    try:
        name = str(data["name"])
        dof = int(data["dof"])
        joints = data["joints"]
    except (KeyError, TypeError) as exc:
        raise ChainLoadError(f"missing required robot key: {exc}") from exc
    if len(joints) != dof:
        raise ChainLoadError(f"dof={dof} but {len(joints)} joints given")
    try:
        a = [float(j["a"]) for j in joints]
        alpha = [float(j["alpha"]) for j in joints]
        d = [float(j["d"]) for j in joints]
        off = [float(j["theta_offset"]) for j in joints]
        lo = [float(j["pos_lower"]) for j in joints]
        hi = [float(j["pos_upper"]) for j in joints]
        vel = [float(j["vel_max"]) for j in joints]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChainLoadError(f"bad joint record: {exc}") from exc

    tool = Pose.identity()
    if "tool_transform" in data:
        tt = data["tool_transform"]
        try:
            tq = np.asarray(tt["quaternion"], dtype=float).reshape(4)
            tp = np.asarray(tt["position"], dtype=float).reshape(3)
        except (KeyError, TypeError, ValueError) as exc:
            raise ChainLoadError(f"bad tool_transform: {exc}") from exc
        if abs(np.linalg.norm(tq) - 1.0) > QUAT_NORM_TOL:
            raise ChainLoadError("tool_transform quaternion is not unit norm")
        tool = Pose(tp, tq)

    tolerance = ToleranceSpec.exact()
    if "tolerance" in data:
        t = data["tolerance"]
        try:
            tlo = [_parse_bound(v) for v in t["lower"]]
            thi = [_parse_bound(v) for v in t["upper"]]
        except (KeyError, TypeError) as exc:
            raise ChainLoadError(f"bad tolerance: {exc}") from exc
        if len(tlo) != 6 or len(thi) != 6:
            raise ChainLoadError("tolerance bounds must have 6 entries")
        try:
            tolerance = ToleranceSpec(tlo, thi)
        except ValueError as exc:
            raise ChainLoadError(str(exc)) from exc

    try:
        return KinematicChain(
            name=name, a=a, alpha=alpha, d=d, theta_offset=off,
            pos_lower=lo, pos_upper=hi, vel_max=vel,
            tool_transform=tool, tolerance=tolerance,
        )
    except ValueError as exc:
        raise ChainLoadError(str(exc)) from exc


def load_chain(path) -> KinematicChain:
    """Load a chain from a robot-definition JSON file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ChainLoadError(f"cannot read robot file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChainLoadError(f"invalid JSON in {path}: {exc}") from exc
    return chain_from_dict(data)


def preset_path(name: str) -> Path:
    """Path of a robot definition shipped with the package."""
    p = Path(__file__).parent / "robots" / f"{name}.json"
    if not p.is_file():
        available = sorted(f.stem for f in p.parent.glob("*.json"))
        raise ChainLoadError(f"unknown robot preset {name!r}; available: {available}")
    return p


def preset_chain(name: str) -> KinematicChain:
    return load_chain(preset_path(name))
