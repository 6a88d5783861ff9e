"""Optimization-based IK: damped-least-squares solves seeded from random or
targeted starting configurations, plus greedy duplicate merging.

Solves are batched over seeds, optionally with a different target per row;
each seed evolves independently, so the batch path matches solving seeds one
at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import (
    KinematicChain,
    Pose,
    _jacobian_from_frames,
    _pose_residual,
    chain_frames,
    matrix_from_quat,
    quat_from_matrix,
)

__all__ = [
    "IkSettings",
    "EPS_MERGE",
    "solve_ik",
    "solve_ik_batch",
    "solve_ik_multi",
    "sample_ik_uniform",
    "sample_ik_targeted",
    "merge_similar",
]

# joint-space radius below which two IK solutions count as duplicates
EPS_MERGE = 0.01


@dataclass(frozen=True)
class IkSettings:
    """Damped-least-squares iteration parameters."""

    max_iters: int = 200
    damping: float = 0.1
    pos_tol: float = 1e-4
    rot_tol: float = 1e-3
    step_clamp: float = 0.2

    def __post_init__(self):
        if (
            self.max_iters <= 0
            or self.damping <= 0.0
            or self.pos_tol <= 0.0
            or self.rot_tol <= 0.0
            or self.step_clamp <= 0.0
        ):
            raise ValueError("all IK settings must be strictly positive")


DEFAULT_IK = IkSettings()


def solve_ik_multi(
    chain: KinematicChain,
    target_positions: np.ndarray,
    target_quaternions: np.ndarray,
    seeds: np.ndarray,
    settings: IkSettings | None = None,
):
    """Run DLS from each seed row toward its own target row.

    Update rule: dq = J^T (J J^T + lambda^2 I)^-1 e with the residual
    tolerance-projected in the target tool frame, each step clamped per
    joint, and iterates clipped to the position limits.

    Returns (configs (B, k), converged (B,) bool). Rows that did not
    converge within max_iters hold their last iterate and are flagged False.
    """
    st = settings or DEFAULT_IK
    Q = chain.clip_to_limits(np.atleast_2d(np.asarray(seeds, dtype=float)).copy())
    if Q.shape[1] != chain.dof:
        raise ValueError(f"seed batch has {Q.shape[1]} joints, chain expects {chain.dof}")
    B = Q.shape[0]
    done = np.zeros(B, dtype=bool)
    if B == 0:
        return Q, done
    t_pos = np.broadcast_to(np.asarray(target_positions, dtype=float), (B, 3))
    t_quat = np.broadcast_to(np.asarray(target_quaternions, dtype=float), (B, 4))
    R_t = matrix_from_quat(t_quat)
    tol = chain.tolerance
    damping = st.damping**2 * np.eye(6)
    active = np.arange(B)
    tp, tq, Rt = t_pos, t_quat, R_t
    for it in range(st.max_iters + 1):
        Qa = Q[active]
        R, p, origins, axes = chain_frames(chain, Qa)
        quat = quat_from_matrix(R)
        err = _pose_residual(p, quat, tp, tq, Rt, tol)
        ok = (np.abs(err[:, :3]) <= st.pos_tol).all(axis=1) & (
            np.abs(err[:, 3:]) <= st.rot_tol
        ).all(axis=1)
        if ok.any():
            done[active[ok]] = True
            keep = ~ok
            active = active[keep]
            if active.size == 0:
                break
            Qa, err, p = Qa[keep], err[keep], p[keep]
            origins, axes = origins[keep], axes[keep]
            tp, tq, Rt = tp[keep], tq[keep], Rt[keep]
        if it == st.max_iters:
            break
        J = _jacobian_from_frames(p, origins, axes)
        # corrective twist in base frame: rotate residual out of the tool frame
        e = np.empty_like(err)
        e[:, :3] = -np.matmul(Rt, err[:, :3, None])[:, :, 0]
        e[:, 3:] = -np.matmul(Rt, err[:, 3:, None])[:, :, 0]
        A = J @ J.transpose(0, 2, 1) + damping
        dq = (J.transpose(0, 2, 1) @ np.linalg.solve(A, e[:, :, None]))[:, :, 0]
        np.clip(dq, -st.step_clamp, st.step_clamp, out=dq)
        Q[active] = chain.clip_to_limits(Qa + dq)
    return Q, done


def solve_ik_batch(
    chain: KinematicChain,
    target: Pose,
    seeds: np.ndarray,
    settings: IkSettings | None = None,
):
    """DLS from each seed row toward a common target; see solve_ik_multi."""
    return solve_ik_multi(chain, target.position, target.quaternion, seeds, settings)


def solve_ik(
    chain: KinematicChain,
    target: Pose,
    seed: np.ndarray,
    settings: IkSettings | None = None,
) -> np.ndarray | None:
    """DLS solve from a single seed; None when it fails to converge."""
    seed = np.asarray(seed, dtype=float).reshape(-1)
    if seed.shape[0] != chain.dof:
        raise ValueError(f"seed has {seed.shape[0]} joints, chain expects {chain.dof}")
    Q, done = solve_ik_batch(chain, target, seed[None, :], settings)
    return Q[0] if done[0] else None


def merge_similar(configs, eps_merge: float = EPS_MERGE) -> np.ndarray:
    """Greedy single-pass dedup: drop configs within eps (inf-norm) of a kept one."""
    configs = np.atleast_2d(np.asarray(configs, dtype=float))
    if configs.size == 0:
        return configs.reshape(0, configs.shape[1] if configs.ndim == 2 else 0)
    kept = [configs[0]]
    for c in configs[1:]:
        d = np.abs(np.asarray(kept) - c).max(axis=1)
        if not (d <= eps_merge).any():
            kept.append(c)
    return np.array(kept)


def sample_ik_uniform(
    chain: KinematicChain,
    target: Pose,
    count: int,
    rng: np.random.Generator,
    settings: IkSettings | None = None,
    eps_merge: float = EPS_MERGE,
) -> np.ndarray:
    """Solve from `count` seeds drawn uniformly within the position limits.

    Returns the deduplicated successes as an (n, k) array, n <= count.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    seeds = rng.uniform(chain.pos_lower, chain.pos_upper, size=(count, chain.dof))
    Q, done = solve_ik_batch(chain, target, seeds, settings)
    if not done.any():
        return np.zeros((0, chain.dof))
    return merge_similar(Q[done], eps_merge)


def sample_ik_targeted(
    chain: KinematicChain,
    target: Pose,
    anchor: np.ndarray,
    stddev: float,
    count: int,
    rng: np.random.Generator,
    settings: IkSettings | None = None,
    eps_merge: float = EPS_MERGE,
) -> np.ndarray:
    """Solve from seeds scattered around `anchor` with Gaussian noise."""
    anchor = np.asarray(anchor, dtype=float).reshape(-1)
    if anchor.shape[0] != chain.dof:
        raise ValueError(f"anchor has {anchor.shape[0]} joints, chain expects {chain.dof}")
    if count < 0:
        raise ValueError("count must be non-negative")
    if stddev < 0:
        raise ValueError("stddev must be non-negative")
    seeds = chain.clip_to_limits(anchor + rng.normal(0.0, stddev, size=(count, chain.dof)))
    Q, done = solve_ik_batch(chain, target, seeds, settings)
    if not done.any():
        return np.zeros((0, chain.dof))
    return merge_similar(Q[done], eps_merge)
