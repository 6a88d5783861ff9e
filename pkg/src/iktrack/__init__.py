"""Joint-space motion synthesis for end-effector trajectory tracking.

A layered graph over sampled IK solutions is searched for minimum-cost
motions; three planners are provided: one-shot conventional, naive anytime,
and guided anytime (sparse guide paths biasing further sampling).
"""

from .frameworks import (
    AnytimeTrace,
    FrameworkConfig,
    TraceRecord,
    build_conventional_graph,
    run_conventional,
    run_guided_anytime,
    run_naive_anytime,
    write_solution_csv,
    write_trace_csv,
)
from .graph import Edge, EdgeKind, LayeredGraph, VertexId, edge_feasible
from .ik import (
    EPS_MERGE,
    IkSettings,
    merge_similar,
    sample_ik_targeted,
    sample_ik_uniform,
    solve_ik,
    solve_ik_batch,
    solve_ik_multi,
)
from .kinematics import (
    ChainLoadError,
    KinematicChain,
    Pose,
    ToleranceSpec,
    chain_from_dict,
    forward_kinematics,
    forward_kinematics_batch,
    jacobian,
    jacobian_batch,
    load_chain,
    pose_error,
    pose_error_batch,
    preset_chain,
    preset_path,
)
from .search import (
    Cost,
    EdgeFilter,
    Metric,
    PathNotFound,
    PathResult,
    fold_cost,
    shortest_path,
)
from .trajectory import (
    Trajectory,
    TrajectoryLoadError,
    Waypoint,
    generate_bezier,
    load_trajectory,
    path_stats,
    save_trajectory,
)

__version__ = "0.1.0"
