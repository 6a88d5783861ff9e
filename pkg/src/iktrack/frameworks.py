"""The three end-to-end planners over the layered graph: one-shot
conventional, naive anytime, and the six-stage guided anytime framework.

Per-iteration IK solves are fused into one multi-target batch; seeds come
from substreams keyed by (master seed, iteration, layer, purpose), so runs
are reproducible and the fused path matches per-layer sequential sampling.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import LayeredGraph
from .ik import EPS_MERGE, IkSettings, solve_ik, solve_ik_multi
from .kinematics import KinematicChain
from .search import Cost, EdgeFilter, Metric, PathNotFound, PathResult, shortest_path
from .trajectory import Trajectory

__all__ = [
    "FrameworkConfig",
    "TraceRecord",
    "AnytimeTrace",
    "run_conventional",
    "run_naive_anytime",
    "run_guided_anytime",
    "build_conventional_graph",
    "write_solution_csv",
    "write_trace_csv",
]

# rng substream purposes
_UNIFORM, _GREEDY, _TARGETED, _GUIDE_UNIFORM = 0, 1, 2, 3


@dataclass
class FrameworkConfig:
    """Knobs shared by the planners; field names mirror the CLI flags.

    m: samples per waypoint (conventional); dm: samples per waypoint per
    iteration (naive); m0: stage-1 samples per sparse layer; md: base
    targeted samples per layer per iteration; s: sparse step in layers;
    delta: targeted-seed noise stddev; eta: per-iteration growth of the
    stage-4 budgets. Anytime runs stop on budget_secs and/or max_iters,
    whichever comes first (checked between iterations).
    """

    metric: Metric = Metric.MOVEMENT_ONLY
    allow_reconfig: bool = False
    m: int = 250
    dm: int = 25
    m0: int = 50
    md: int = 5
    s: int = 5
    delta: float = 0.2
    eta: float = 1.1
    budget_secs: float | None = None
    max_iters: int | None = None
    seed: int = 0
    ik: IkSettings = field(default_factory=IkSettings)
    merge_eps: float = EPS_MERGE

    def __post_init__(self):
        if min(self.m, self.dm, self.m0, self.md, self.s) < 1:
            raise ValueError("m, dm, m0, md, s must all be >= 1")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.eta < 1.0:
            raise ValueError("eta must be >= 1")
        if self.budget_secs is not None and self.budget_secs <= 0:
            raise ValueError("budget_secs must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    elapsed: float
    cost: Cost
    iteration: int


@dataclass
class AnytimeTrace:
    """Quality-vs-time curve: one record per iteration that found a solution.

    sampling_log holds per-iteration instrumentation: requested seed counts
    per layer, keyed by purpose ("uniform", "targeted", "greedy").
    """

    records: list[TraceRecord] = field(default_factory=list)
    sampling_log: list[dict] = field(default_factory=list)

    @property
    def time_to_first(self) -> float | None:
        return self.records[0].elapsed if self.records else None

    @property
    def final_cost(self) -> Cost | None:
        return self.records[-1].cost if self.records else None


def _rng(seed: int, iteration: int, layer: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, iteration, layer, purpose)))


def _fused_sample(chain, traj, jobs, settings):
    """Solve every (layer, seeds) job toward its waypoint in one batch.

    Returns {layer: successes in seed order}; per-row math is identical to
    per-layer sequential solving, so results match the unfused path.
    """
    jobs = [(x, np.atleast_2d(s)) for x, s in jobs if len(s)]
    if not jobs:
        return {}
    seeds = np.vstack([s for _, s in jobs])
    counts = [s.shape[0] for _, s in jobs]
    t_pos = np.vstack([np.broadcast_to(traj.positions[x], (c, 3)) for (x, _), c in zip(jobs, counts)])
    t_quat = np.vstack([np.broadcast_to(traj.quaternions[x], (c, 4)) for (x, _), c in zip(jobs, counts)])
    Q, done = solve_ik_multi(chain, t_pos, t_quat, seeds, settings)
    out: dict[int, list[np.ndarray]] = {}
    row = 0
    for (x, _), c in zip(jobs, counts):
        sel = done[row : row + c]
        out.setdefault(x, []).append(Q[row : row + c][sel])
        row += c
    return {x: np.vstack(parts) for x, parts in out.items()}


def _uniform_seeds(chain, rng, count):
    return rng.uniform(chain.pos_lower, chain.pos_upper, size=(count, chain.dof))


class _Budget:
    def __init__(self, cfg: FrameworkConfig, t0: float):
        if cfg.budget_secs is None and cfg.max_iters is None:
            raise ValueError("anytime frameworks need budget_secs and/or max_iters")
        self.cfg = cfg
        self.t0 = t0

    def exhausted(self, next_iteration: int) -> bool:
        if self.cfg.max_iters is not None and next_iteration > self.cfg.max_iters:
            return True
        if self.cfg.budget_secs is not None:
            return time.perf_counter() - self.t0 >= self.cfg.budget_secs
        return False


# ---------------------------------------------------------------------------
# conventional sequential framework
# ---------------------------------------------------------------------------

def build_conventional_graph(
    chain: KinematicChain, traj: Trajectory, cfg: FrameworkConfig
) -> LayeredGraph:
    """Sample m IK solutions per waypoint and densely connect all layers."""
    g = LayeredGraph(traj, sparse_step=1, merge_eps=cfg.merge_eps)
    jobs = [
        (x, _uniform_seeds(chain, _rng(cfg.seed, 1, x, _UNIFORM), cfg.m))
        for x in range(len(traj))
    ]
    for x, configs in _fused_sample(chain, traj, jobs, cfg.ik).items():
        g.add_vertices(x, configs)
    for x in range(len(traj) - 1):
        g.connect_dense(x, chain, cfg.allow_reconfig)
    return g


def run_conventional(
    chain: KinematicChain, traj: Trajectory, cfg: FrameworkConfig
) -> tuple[PathResult, AnytimeTrace]:
    """One-shot pipeline: sample everything, connect, search once."""
    t0 = time.perf_counter()
    g = build_conventional_graph(chain, traj, cfg)
    result = shortest_path(g, cfg.metric, EdgeFilter.DENSE_ONLY)
    trace = AnytimeTrace(
        records=[TraceRecord(time.perf_counter() - t0, result.cost, 1)],
        sampling_log=[{"iteration": 1, "uniform": {x: cfg.m for x in range(len(traj))}}],
    )
    return result, trace


# ---------------------------------------------------------------------------
# naive anytime framework
# ---------------------------------------------------------------------------

def run_naive_anytime(
    chain: KinematicChain, traj: Trajectory, cfg: FrameworkConfig
) -> tuple[PathResult, AnytimeTrace]:
    """Incremental uniform sampling with a greedy-IK first iteration.

    Iteration 1 seeds each layer with a greedy chain (each waypoint solved
    from the previous waypoint's greedy solution) plus dm-1 uniform samples;
    later iterations add dm uniform samples per layer, reconnect, re-search.
    """
    t0 = time.perf_counter()
    budget = _Budget(cfg, t0)
    n = len(traj)
    g = LayeredGraph(traj, sparse_step=1, merge_eps=cfg.merge_eps)
    trace = AnytimeTrace()
    best: PathResult | None = None
    furthest = 0
    iteration = 1
    while True:
        log: dict = {"iteration": iteration, "uniform": {}, "greedy": {}}
        if iteration == 1:
            anchor = chain.mid_config()
            for x in range(n):
                log["greedy"][x] = 1
                sol = solve_ik(chain, traj.pose(x), anchor, cfg.ik)
                if sol is not None:
                    g.add_vertices(x, sol[None, :])
                    anchor = sol
            count = cfg.dm - 1
        else:
            count = cfg.dm
        if count > 0:
            jobs = [
                (x, _uniform_seeds(chain, _rng(cfg.seed, iteration, x, _UNIFORM), count))
                for x in range(n)
            ]
            log["uniform"] = {x: count for x in range(n)}
            for x, configs in _fused_sample(chain, traj, jobs, cfg.ik).items():
                g.add_vertices(x, configs)
        for x in range(n - 1):
            g.connect_dense(x, chain, cfg.allow_reconfig)
        trace.sampling_log.append(log)
        try:
            result = shortest_path(g, cfg.metric, EdgeFilter.DENSE_ONLY)
            trace.records.append(TraceRecord(time.perf_counter() - t0, result.cost, iteration))
            best = result
        except PathNotFound as exc:
            furthest = max(furthest, exc.furthest_layer)
        iteration += 1
        if budget.exhausted(iteration):
            break
    if best is None:
        raise PathNotFound(furthest)
    return best, trace


# ---------------------------------------------------------------------------
# guided anytime framework
# ---------------------------------------------------------------------------

def _sparse_layers(n: int, s: int) -> list[int]:
    # the last waypoint is always a sparse layer so guide paths can terminate
    return sorted(set(range(0, n, s)) | {n - 1})


def run_guided_anytime(
    chain: KinematicChain, traj: Trajectory, cfg: FrameworkConfig
) -> tuple[PathResult, AnytimeTrace]:
    """Guide-path-biased anytime planner, six stages per iteration:

    1. uniform IK sampling on the sparse layers (first iteration only),
    2. sparse edges between consecutive sparse layers,
    3. guide-path search over dense + sparse edges,
    4. targeted sampling around the guide path (anchors interpolate each
       sparse edge across the layers it skips) plus an equal number of
       uniform samples per layer,
    5. dense edges on every touched layer pair, then superseding of guide
       sparse edges whose span is now densely connected,
    6. solution search over dense edges only.
    """
    t0 = time.perf_counter()
    budget = _Budget(cfg, t0)
    n = len(traj)
    sparse = _sparse_layers(n, cfg.s)
    g = LayeredGraph(traj, sparse_step=cfg.s, merge_eps=cfg.merge_eps)
    trace = AnytimeTrace()
    best: PathResult | None = None
    furthest = 0
    need_seeding = True
    iteration = 1
    while True:
        log: dict = {"iteration": iteration, "uniform": {}, "targeted": {}}
        # stage 1: sparse vertex sampling (first iteration, or retry after a
        # failed guide search)
        if need_seeding:
            jobs = [
                (x, _uniform_seeds(chain, _rng(cfg.seed, iteration, x, _UNIFORM), cfg.m0))
                for x in sparse
            ]
            for x in sparse:
                log["uniform"][x] = log["uniform"].get(x, 0) + cfg.m0
            for x, configs in _fused_sample(chain, traj, jobs, cfg.ik).items():
                g.add_vertices(x, configs)
            need_seeding = False
        # stage 2: sparse edge addition
        for a, b in zip(sparse[:-1], sparse[1:]):
            g.connect_sparse(a, b, chain, cfg.allow_reconfig)
        # stage 3: guide path search
        try:
            guide = shortest_path(g, cfg.metric, EdgeFilter.DENSE_AND_SPARSE)
        except PathNotFound as exc:
            furthest = max(furthest, exc.furthest_layer)
            guide = None
            need_seeding = True  # densify the sparse scaffold and retry
        if guide is not None:
            # stage 4: additional vertex sampling around the whole guide path.
            # Layers skipped by a sparse edge anchor on the joint-space
            # interpolation of its endpoints; layers where the guide has a
            # vertex anchor on that vertex. Every layer also gets an equal
            # number of uniform seeds, so cumulative uniform coverage grows
            # everywhere even when a misleading sparse edge never clears.
            count = math.ceil(cfg.md * cfg.eta ** (iteration - 1))
            anchors = np.empty((n, guide.configs.shape[1]))
            for i, vid in enumerate(guide.vertices):
                anchors[vid.layer] = guide.configs[i]
            for i, (u, v) in enumerate(zip(guide.vertices[:-1], guide.vertices[1:])):
                if v.layer - u.layer < 2:
                    continue
                qu, qv = guide.configs[i], guide.configs[i + 1]
                for j in range(u.layer + 1, v.layer):
                    anchors[j] = qu + ((j - u.layer) / (v.layer - u.layer)) * (qv - qu)
            jobs = []
            touched: set[int] = set(range(n))
            for j in range(n):
                jobs.append((j, _targeted_seeds(chain, cfg, iteration, j, anchors[j], count)))
                jobs.append(
                    (j, _uniform_seeds(chain, _rng(cfg.seed, iteration, j, _GUIDE_UNIFORM), count))
                )
                log["targeted"][j] = count
                log["uniform"][j] = log["uniform"].get(j, 0) + count
            for x, configs in _fused_sample(chain, traj, jobs, cfg.ik).items():
                g.add_vertices(x, configs)
            # stage 5: dense edges on touched pairs, then superseding
            pairs = set()
            for j in touched:
                if j > 0:
                    pairs.add(j - 1)
                if j < n - 1:
                    pairs.add(j)
            for x in sorted(pairs):
                g.connect_dense(x, chain, cfg.allow_reconfig)
            g.supersede_sparse(guide)
            # stage 6: solution search
            try:
                result = shortest_path(g, cfg.metric, EdgeFilter.DENSE_ONLY)
                trace.records.append(TraceRecord(time.perf_counter() - t0, result.cost, iteration))
                best = result
            except PathNotFound as exc:
                furthest = max(furthest, exc.furthest_layer)
        trace.sampling_log.append(log)
        iteration += 1
        if budget.exhausted(iteration):
            break
    if best is None:
        raise PathNotFound(furthest)
    return best, trace


def _targeted_seeds(chain, cfg, iteration, layer, anchor, count):
    rng = _rng(cfg.seed, iteration, layer, _TARGETED)
    return chain.clip_to_limits(anchor + rng.normal(0.0, cfg.delta, size=(count, chain.dof)))


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_trace_csv(trace: AnytimeTrace, path) -> None:
    lines = ["iteration,elapsed_s,reconfigs,movement_rad"]
    for r in trace.records:
        lines.append(f"{r.iteration},{r.elapsed:.17g},{r.cost.reconfigs},{r.cost.movement:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_solution_csv(traj: Trajectory, result: PathResult, path) -> None:
    """One row per waypoint: time, joint angles, and a flag marking the first
    config after a reconfiguration jump."""
    if not result.is_solution:
        raise ValueError("only solutions (one vertex per layer) can be written")
    k = result.configs.shape[1]
    lines = ["t," + ",".join(f"q{j + 1}" for j in range(k)) + ",reconfig"]
    for i in range(len(result.vertices)):
        flag = int(result.reconfig_flags[i - 1]) if i > 0 else 0
        qs = ",".join(f"{v:.17g}" for v in result.configs[i])
        lines.append(f"{traj.times[i]:.17g},{qs},{flag}")
    Path(path).write_text("\n".join(lines) + "\n")
