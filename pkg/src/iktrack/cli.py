"""Command-line harness: generate reference trajectories, track them with a
chosen framework, and compare frameworks over repeated seeded runs.

Exit codes: 0 success, 2 usage error, 3 load error, 4 no solution found.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .frameworks import (
    FrameworkConfig,
    run_conventional,
    run_guided_anytime,
    run_naive_anytime,
    write_solution_csv,
    write_trace_csv,
)
from .kinematics import ChainLoadError, load_chain, preset_chain
from .search import Cost, Metric, PathNotFound
from .trajectory import (
    TrajectoryLoadError,
    generate_bezier,
    load_trajectory,
    path_stats,
    save_trajectory,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_LOAD = 3
EXIT_NO_SOLUTION = 4

METRICS = {
    "movement": Metric.MOVEMENT_ONLY,
    "max-delta": Metric.MAX_JOINT_DELTA,
    "lex": Metric.LEX_RECONFIG_MOVEMENT,
}

RUNNERS = {
    "conventional": run_conventional,
    "naive": run_naive_anytime,
    "guided": run_guided_anytime,
}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {value}")
    return value


def _vector3(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return [float(p) for p in parts]


def _vector4(text: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected w,x,y,z, got {text!r}")
    return [float(p) for p in parts]


def _resolve_chain(robot: str):
    path = Path(robot)
    if path.is_file():
        return load_chain(path)
    return preset_chain(robot)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iktrack",
        description="Graph-based end-effector trajectory tracking",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a random smooth reference trajectory")
    gen.add_argument("--segments", type=_positive_int, default=1)
    gen.add_argument("--waypoints", type=_positive_int, default=200)
    gen.add_argument("--duration", type=_positive_float, default=10.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--center", type=_vector3, default=[0.5, 0.0, 0.4])
    gen.add_argument("--radius", type=_positive_float, default=0.3)
    gen.add_argument("--base-quat", type=_vector4, default=[1.0, 0.0, 0.0, 0.0])
    gen.add_argument("--rot-step", type=float, default=0.5)
    gen.add_argument("--out", required=True)

    def add_framework_flags(p):
        p.add_argument("--metric", choices=sorted(METRICS), default="movement")
        p.add_argument("--allow-reconfig", action="store_true")
        p.add_argument("--m", type=_positive_int, default=250)
        p.add_argument("--dm", type=_positive_int, default=25)
        p.add_argument("--m0", type=_positive_int, default=50)
        p.add_argument("--md", type=_positive_int, default=5)
        p.add_argument("--s", type=_positive_int, default=5)
        p.add_argument("--delta", type=float, default=0.2)
        p.add_argument("--eta", type=float, default=1.1)
        p.add_argument("--budget-secs", type=_positive_float, default=None)
        p.add_argument("--max-iters", type=_positive_int, default=None)
        p.add_argument("--seed", type=int, default=0)

    trk = sub.add_parser("track", help="synthesize a joint motion for a trajectory")
    trk.add_argument("--robot", required=True, help="robot file or preset name")
    trk.add_argument("--traj", required=True)
    trk.add_argument("--framework", choices=sorted(RUNNERS), default="guided")
    add_framework_flags(trk)
    trk.add_argument("--solution-out", default=None)
    trk.add_argument("--trace-out", default=None)

    cmp_ = sub.add_parser("compare", help="run several frameworks over repeated seeds")
    cmp_.add_argument("--robot", required=True)
    cmp_.add_argument("--traj", required=True)
    cmp_.add_argument(
        "--frameworks",
        default="conventional,naive,guided",
        help="comma-separated subset of conventional,naive,guided",
    )
    add_framework_flags(cmp_)
    cmp_.add_argument("--runs", type=_positive_int, default=1)
    cmp_.add_argument(
        "--s-list", default=None,
        help="comma-separated sparse steps; expands guided into one row per value",
    )
    cmp_.add_argument(
        "--match-budget", action="store_true",
        help="budget anytime runs by the conventional completion time per seed",
    )
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--trace-dir", default=None)
    return parser


def _config_from_args(args, seed=None, s=None, budget_secs=None) -> FrameworkConfig:
    return FrameworkConfig(
        metric=METRICS[args.metric],
        allow_reconfig=args.allow_reconfig,
        m=args.m,
        dm=args.dm,
        m0=args.m0,
        md=args.md,
        s=s if s is not None else args.s,
        delta=args.delta,
        eta=args.eta,
        budget_secs=budget_secs if budget_secs is not None else args.budget_secs,
        max_iters=args.max_iters,
        seed=seed if seed is not None else args.seed,
    )


def _cmd_generate(args) -> int:
    traj = generate_bezier(
        np.random.default_rng(args.seed),
        args.segments,
        args.duration,
        args.waypoints,
        args.center,
        args.radius,
        base_quat=args.base_quat,
        rot_step=args.rot_step,
    )
    save_trajectory(traj, args.out)
    length, angular = path_stats(traj)
    print(
        f"wrote {len(traj)} waypoints to {args.out}: "
        f"length {length:.3f} m, angular displacement {angular:.3f} rad"
    )
    return EXIT_OK


def _cmd_track(args) -> int:
    try:
        chain = _resolve_chain(args.robot)
        traj = load_trajectory(args.traj)
    except (ChainLoadError, TrajectoryLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    cfg = _config_from_args(args)
    if args.framework != "conventional" and cfg.budget_secs is None and cfg.max_iters is None:
        print("error: anytime frameworks need --budget-secs and/or --max-iters", file=sys.stderr)
        return EXIT_USAGE
    try:
        result, trace = RUNNERS[args.framework](chain, traj, cfg)
    except PathNotFound as exc:
        print(f"no solution: {exc}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    if args.solution_out:
        write_solution_csv(traj, result, args.solution_out)
    if args.trace_out:
        write_trace_csv(trace, args.trace_out)
    print(
        f"{args.framework}: cost ({result.cost.reconfigs}, {result.cost.movement:.4f}) "
        f"after {len(trace.records)} recorded solution(s), "
        f"first at {trace.time_to_first:.3f} s"
    )
    return EXIT_OK


def _expand_frameworks(args) -> list[tuple[str, str, int | None]]:
    names = [f.strip() for f in args.frameworks.split(",") if f.strip()]
    for name in names:
        if name not in RUNNERS:
            raise argparse.ArgumentTypeError(f"unknown framework {name!r}")
    out = []
    for name in names:
        if name == "guided" and args.s_list:
            for s_text in args.s_list.split(","):
                s = _positive_int(s_text.strip())
                out.append((f"guided[s={s}]", name, s))
        else:
            out.append((name, name, None))
    return out


def _cmd_compare(args) -> int:
    try:
        chain = _resolve_chain(args.robot)
        traj = load_trajectory(args.traj)
        rows = _expand_frameworks(args)
    except (ChainLoadError, TrajectoryLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    trace_dir = Path(args.trace_dir) if args.trace_dir else None
    if trace_dir:
        trace_dir.mkdir(parents=True, exist_ok=True)

    # per-seed conventional completion times when budgets are matched
    matched_budget: dict[int, float] = {}
    conventional_cache: dict[int, tuple] = {}
    if args.match_budget:
        for i in range(args.runs):
            seed = args.seed + i
            cfg = _config_from_args(args, seed=seed)
            t0 = time.perf_counter()
            try:
                conventional_cache[seed] = RUNNERS["conventional"](chain, traj, cfg)
            except PathNotFound:
                conventional_cache[seed] = None
            matched_budget[seed] = time.perf_counter() - t0

    lines = [
        "framework,runs,failures,mean_ttfs_s,best_reconfigs,best_movement_rad,"
        "mean_reconfigs,mean_movement_rad,worst_reconfigs,worst_movement_rad"
    ]
    total_success = 0
    for label, name, s in rows:
        finals: list[Cost] = []
        ttfs: list[float] = []
        failures = 0
        for i in range(args.runs):
            seed = args.seed + i
            budget = matched_budget.get(seed) if name != "conventional" else None
            cfg = _config_from_args(args, seed=seed, s=s, budget_secs=budget)
            if name != "conventional" and cfg.budget_secs is None and cfg.max_iters is None:
                print(
                    "error: anytime frameworks need --budget-secs, --max-iters, "
                    "or --match-budget",
                    file=sys.stderr,
                )
                return EXIT_USAGE
            try:
                if name == "conventional" and seed in conventional_cache:
                    cached = conventional_cache[seed]
                    if cached is None:
                        raise PathNotFound(0)
                    result, trace = cached
                else:
                    result, trace = RUNNERS[name](chain, traj, cfg)
            except PathNotFound:
                failures += 1
                continue
            finals.append(result.cost)
            ttfs.append(trace.time_to_first)
            if trace_dir:
                write_trace_csv(trace, trace_dir / f"{label.replace('[', '_').rstrip(']')}_run{i}.csv")
        total_success += len(finals)
        if finals:
            best = min(finals)
            worst = max(finals)
            mean_r = float(np.mean([c.reconfigs for c in finals]))
            mean_m = float(np.mean([c.movement for c in finals]))
            lines.append(
                f"{label},{args.runs},{failures},{np.mean(ttfs):.6f},"
                f"{best.reconfigs},{best.movement:.17g},"
                f"{mean_r:.17g},{mean_m:.17g},"
                f"{worst.reconfigs},{worst.movement:.17g}"
            )
        else:
            lines.append(f"{label},{args.runs},{failures},,,,,,,")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(rows)} aggregate rows to {args.out}")
    return EXIT_OK if total_success else EXIT_NO_SOLUTION


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate":
        return _cmd_generate(args)
    if args.command == "track":
        return _cmd_track(args)
    return _cmd_compare(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
