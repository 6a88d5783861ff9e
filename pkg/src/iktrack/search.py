"""Exact shortest-path search over the layered DAG.

A single forward pass in layer order relaxes each admitted edge block with
vectorized lexicographic minimization, covering both guide-path search
(dense + sparse edges) and solution search (dense only) under all metrics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import total_ordering

import numpy as np

from .graph import LayeredGraph, VertexId, _NONE, _RECONFIG

__all__ = [
    "Cost",
    "Metric",
    "EdgeFilter",
    "PathResult",
    "PathNotFound",
    "shortest_path",
    "fold_cost",
]


@total_ordering
@dataclass(frozen=True)
class Cost:
    """Lexicographic path cost: reconfiguration count, then joint movement."""

    reconfigs: int
    movement: float

    def __lt__(self, other: "Cost") -> bool:
        return (self.reconfigs, self.movement) < (other.reconfigs, other.movement)

    def as_tuple(self) -> tuple[int, float]:
        return (self.reconfigs, self.movement)


class Metric(Enum):
    MOVEMENT_ONLY = "movement"
    MAX_JOINT_DELTA = "max_delta"
    LEX_RECONFIG_MOVEMENT = "lex"

    @property
    def allows_reconfig(self) -> bool:
        return self is Metric.LEX_RECONFIG_MOVEMENT


class EdgeFilter(Enum):
    DENSE_ONLY = "dense_only"
    DENSE_AND_SPARSE = "dense_and_sparse"


class PathNotFound(Exception):
    """Last layer unreachable; carries the furthest reachable layer index."""

    def __init__(self, furthest_layer: int):
        super().__init__(f"no path to the last layer (reached layer {furthest_layer})")
        self.furthest_layer = furthest_layer


@dataclass(frozen=True)
class PathResult:
    """A first-to-last-layer path: guide path or, if every step spans exactly
    one layer, a solution."""

    vertices: tuple[VertexId, ...]
    cost: Cost
    is_solution: bool
    configs: np.ndarray
    reconfig_flags: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.vertices)


def fold_cost(metric: Metric, edges) -> Cost:
    """Fold edge costs along a path: movement sums (or maxes, for the
    max-delta metric); reconfigurations count under the lexicographic metric."""
    edges = list(edges)
    if not edges:
        raise ValueError("path must contain at least one edge")
    movements = [e.movement for e in edges]
    if metric is Metric.MAX_JOINT_DELTA:
        movement = max(movements)
    else:
        movement = float(np.sum(movements))
    reconfigs = sum(e.reconfig for e in edges) if metric.allows_reconfig else 0
    return Cost(int(reconfigs), float(movement))


def shortest_path(graph: LayeredGraph, metric: Metric, edge_filter: EdgeFilter) -> PathResult:
    """Exact optimum over the admitted edges by forward DP in layer order.

    Ties are broken toward the smallest (layer, slot) predecessor, so results
    are deterministic. Raises PathNotFound when the last layer is unreachable;
    the exception carries the furthest reachable layer for diagnostics.
    """
    n = graph.n_layers
    if n < 2:
        raise ValueError("graph needs at least two layers")
    INF = np.inf
    use_reconfig = metric.allows_reconfig
    use_max = metric is Metric.MAX_JOINT_DELTA

    best_r = [np.full(graph.layer_size(x), INF) for x in range(n)]
    best_m = [np.full(graph.layer_size(x), INF) for x in range(n)]
    pred = [np.full((graph.layer_size(x), 2), -1, dtype=np.int64) for x in range(n)]
    if graph.layer_size(0):
        best_r[0][:] = 0.0
        best_m[0][:] = 0.0
    furthest = 0 if graph.layer_size(0) else -1

    for x2 in range(1, n):
        tgt_r, tgt_m, tgt_p = best_r[x2], best_m[x2], pred[x2]
        if tgt_r.shape[0] == 0:
            continue
        for x, block, is_sparse in graph.blocks_into(x2):
            if is_sparse and edge_filter is EdgeFilter.DENSE_ONLY:
                continue
            src_r, src_m = best_r[x], best_m[x]
            nu = min(block.kind_code.shape[0], src_r.shape[0])
            nv = block.kind_code.shape[1]
            if nu == 0 or nv == 0 or not np.isfinite(src_m[:nu]).any():
                continue
            code = block.kind_code[:nu]
            admitted = code != _NONE
            if block.removed is not None:
                admitted &= ~block.removed[:nu]
            if not use_reconfig:
                admitted &= code != _RECONFIG
            if not admitted.any():
                continue
            move = block.movement[:nu]
            if use_max:
                cand_m = np.maximum(src_m[:nu, None], move)
            else:
                cand_m = src_m[:nu, None] + move
            cand_m = np.where(admitted, cand_m, INF)
            if use_reconfig:
                cand_r = src_r[:nu, None] + (code == _RECONFIG)
                cand_r = np.where(admitted, cand_r, INF)
                # lexicographic min over sources: reconfigs first, then movement
                col_r = cand_r.min(axis=0)
                cand_m = np.where(cand_r == col_r[None, :], cand_m, INF)
            else:
                col_r = np.zeros(nv)
            col_u = cand_m.argmin(axis=0)
            col_m = cand_m[col_u, np.arange(nv)]
            col_r = np.where(np.isfinite(col_m), col_r, INF)
            # strict improvement only: earlier source layers win exact ties
            better = (col_r < tgt_r[:nv]) | ((col_r == tgt_r[:nv]) & (col_m < tgt_m[:nv]))
            if better.any():
                idx = np.nonzero(better)[0]
                tgt_r[idx] = col_r[idx]
                tgt_m[idx] = col_m[idx]
                tgt_p[idx, 0] = x
                tgt_p[idx, 1] = col_u[idx]
        if np.isfinite(tgt_m).any():
            furthest = x2

    if furthest < n - 1 or not np.isfinite(best_m[n - 1]).any():
        raise PathNotFound(max(furthest, 0))

    # terminal vertex: lexicographic argmin, smallest slot on ties
    last_r, last_m = best_r[n - 1], best_m[n - 1]
    order = np.lexsort((np.arange(last_r.shape[0]), last_m, last_r))
    slot = int(order[0])
    cost = Cost(int(last_r[slot]) if use_reconfig else 0, float(last_m[slot]))

    vertices = [VertexId(n - 1, slot)]
    while vertices[0].layer > 0:
        x, u = pred[vertices[0].layer][vertices[0].slot]
        if x < 0:
            raise AssertionError("broken predecessor chain")
        vertices.insert(0, VertexId(int(x), int(u)))

    flags = []
    for a, b in zip(vertices[:-1], vertices[1:]):
        edge = graph.edge_between(a, b)
        flags.append(edge.kind.is_reconfig)
    configs = np.array([graph.vertex_config(v) for v in vertices])
    is_solution = all(b.layer - a.layer == 1 for a, b in zip(vertices[:-1], vertices[1:]))
    return PathResult(tuple(vertices), cost, is_solution, configs, tuple(flags))
