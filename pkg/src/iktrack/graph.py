"""Layered graph over IK solutions with dense, sparse, and reconfiguration
edges; velocity feasibility, movement weights, and incremental densification.

Edges between a pair of layers are stored as matrices (kind code + movement)
so connection and search stay vectorized; `Edge` objects are materialized on
demand for inspection. Vertices and dense edges only ever accumulate; sparse
edges may be superseded (removed) once dense paths cover their span.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, NamedTuple

import numpy as np

from .ik import EPS_MERGE
from .kinematics import KinematicChain
from .trajectory import Trajectory

__all__ = [
    "VertexId",
    "EdgeKind",
    "Edge",
    "LayeredGraph",
    "edge_feasible",
]


class VertexId(NamedTuple):
    layer: int
    slot: int


class EdgeKind(Enum):
    DENSE = "dense"
    SPARSE = "sparse"
    DENSE_RECONFIG = "dense_reconfig"
    SPARSE_RECONFIG = "sparse_reconfig"

    @property
    def is_reconfig(self) -> bool:
        return self in (EdgeKind.DENSE_RECONFIG, EdgeKind.SPARSE_RECONFIG)

    @property
    def is_sparse(self) -> bool:
        return self in (EdgeKind.SPARSE, EdgeKind.SPARSE_RECONFIG)


@dataclass(frozen=True)
class Edge:
    source: VertexId
    target: VertexId
    kind: EdgeKind
    movement: float

    @property
    def reconfig(self) -> int:
        return 1 if self.kind.is_reconfig else 0


def edge_feasible(q_a, q_b, dt: float, chain: KinematicChain) -> bool:
    """True iff every joint can move from q_a to q_b within dt (bound inclusive)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    delta = np.abs(np.asarray(q_b, dtype=float) - np.asarray(q_a, dtype=float))
    return bool(np.all(delta <= chain.vel_max * dt))


class _Layer:
    """Append-only vertex store with amortized growth."""

    __slots__ = ("data", "n")

    def __init__(self):
        self.data = None
        self.n = 0

    def array(self) -> np.ndarray:
        if self.data is None:
            return np.zeros((0, 0))
        return self.data[: self.n]

    def append(self, config: np.ndarray) -> int:
        k = config.shape[0]
        if self.data is None:
            self.data = np.empty((8, k))
        elif self.n == self.data.shape[0]:
            grown = np.empty((2 * self.n, k))
            grown[: self.n] = self.data
            self.data = grown
        self.data[self.n] = config
        self.n += 1
        return self.n - 1


# kind codes inside a block
_NONE, _PLAIN, _RECONFIG = 0, 1, 2


class _Block:
    """Edge matrices for one (source layer, target layer) pair."""

    __slots__ = ("kind_code", "movement", "removed")

    def __init__(self, sparse: bool):
        self.kind_code = np.zeros((0, 0), dtype=np.int8)
        self.movement = np.zeros((0, 0))
        self.removed = np.zeros((0, 0), dtype=bool) if sparse else None

    def present(self) -> np.ndarray:
        p = self.kind_code != _NONE
        if self.removed is not None:
            p &= ~self.removed
        return p


def _grow(mat: np.ndarray, shape: tuple[int, int], fill=0) -> np.ndarray:
    out = np.full(shape, fill, dtype=mat.dtype)
    ou, ov = mat.shape
    out[:ou, :ov] = mat
    return out


class LayeredGraph:
    """One layer of IK-solution vertices per trajectory waypoint."""

    def __init__(self, trajectory: Trajectory, sparse_step: int = 1, merge_eps: float = EPS_MERGE):
        self.trajectory = trajectory
        self.sparse_step = sparse_step
        self.merge_eps = merge_eps
        self._layers = [_Layer() for _ in range(len(trajectory))]
        self._dense: dict[int, _Block] = {}
        self._sparse: dict[tuple[int, int], _Block] = {}

    # -- vertices ----------------------------------------------------------

    @property
    def n_layers(self) -> int:
        return len(self._layers)

    def layer_size(self, x: int) -> int:
        return self._layers[x].n

    def layer_sizes(self) -> list[int]:
        return [layer.n for layer in self._layers]

    def layer_array(self, x: int) -> np.ndarray:
        return self._layers[x].array()

    def vertex_config(self, vid: VertexId) -> np.ndarray:
        layer = self._layers[vid.layer]
        if not (0 <= vid.slot < layer.n):
            raise KeyError(f"no vertex {vid}")
        return layer.data[vid.slot].copy()

    def add_vertices(self, x: int, configs) -> list[VertexId]:
        """Append configs not within merge_eps (inf-norm) of existing vertices.

        Returns ids for the retained configs only, in input order.
        """
        configs = np.atleast_2d(np.asarray(configs, dtype=float))
        ids: list[VertexId] = []
        if configs.size == 0:
            return ids
        layer = self._layers[x]
        for c in configs:
            if layer.n:
                d = np.abs(layer.array() - c).max(axis=1)
                if (d <= self.merge_eps).any():
                    continue
            ids.append(VertexId(x, layer.append(c)))
        return ids

    # -- connection --------------------------------------------------------

    def _fill_block(
        self, block: _Block, x: int, x2: int, chain: KinematicChain, allow_reconfig: bool
    ) -> int:
        qa, qb = self.layer_array(x), self.layer_array(x2)
        na, nb = qa.shape[0], qb.shape[0]
        ou, ov = block.kind_code.shape
        added = 0
        if (na, nb) != (ou, ov):
            block.kind_code = _grow(block.kind_code, (na, nb))
            block.movement = _grow(block.movement, (na, nb))
            if block.removed is not None:
                block.removed = _grow(block.removed, (na, nb), fill=False)
            bound = chain.vel_max * self.trajectory.delta_t(x, x2)
            for rows, cols in (
                (slice(ou, na), slice(0, nb)),
                (slice(0, ou), slice(ov, nb)),
            ):
                if rows.stop <= rows.start or cols.stop <= cols.start:
                    continue
                diff = np.abs(qa[rows, None, :] - qb[None, cols, :])
                feas = (diff <= bound).all(axis=-1)
                code = np.where(feas, _PLAIN, _RECONFIG if allow_reconfig else _NONE)
                block.kind_code[rows, cols] = code
                block.movement[rows, cols] = np.sqrt((diff * diff).sum(axis=-1))
                added += int(np.count_nonzero(code))
        if allow_reconfig and ou and ov:
            # pairs checked earlier without reconfig edges get them now
            old = block.kind_code[:ou, :ov]
            mask = old == _NONE
            if mask.any():
                old[mask] = _RECONFIG
                added += int(mask.sum())
        return added

    def connect_dense(self, x: int, chain: KinematicChain, allow_reconfig: bool) -> int:
        """Connect every not-yet-connected pair between layers x and x+1.

        Velocity-feasible pairs get a dense edge; the rest get a dense
        reconfiguration edge when allow_reconfig. Idempotent.
        """
        if not 0 <= x < self.n_layers - 1:
            raise IndexError(f"no dense pair at layer {x}")
        block = self._dense.get(x)
        if block is None:
            block = self._dense[x] = _Block(sparse=False)
        return self._fill_block(block, x, x + 1, chain, allow_reconfig)

    def connect_sparse(self, x: int, x2: int, chain: KinematicChain, allow_reconfig: bool) -> int:
        """Same rule as connect_dense for layers >1 apart, with sparse kinds.

        A span of exactly one layer is a dense connection and is delegated,
        keeping edge kinds consistent with their span.
        """
        if not 0 <= x < x2 < self.n_layers:
            raise IndexError(f"invalid sparse pair ({x}, {x2})")
        if x2 == x + 1:
            return self.connect_dense(x, chain, allow_reconfig)
        block = self._sparse.get((x, x2))
        if block is None:
            block = self._sparse[(x, x2)] = _Block(sparse=True)
        return self._fill_block(block, x, x2, chain, allow_reconfig)

    # -- superseding -------------------------------------------------------

    def _dense_reachable(self, u: VertexId, v: VertexId) -> bool:
        reach = np.zeros(self.layer_size(u.layer), dtype=bool)
        reach[u.slot] = True
        for j in range(u.layer, v.layer):
            block = self._dense.get(j)
            nxt = np.zeros(self.layer_size(j + 1), dtype=bool)
            if block is not None and block.kind_code.size:
                present = block.kind_code != _NONE
                r = reach[: present.shape[0]]
                if r.any():
                    sub = present[r].any(axis=0)
                    nxt[: sub.shape[0]] = sub
            if not nxt.any():
                return False
            reach = nxt
        return bool(reach[v.slot])

    def supersede_sparse(self, guide) -> int:
        """Remove each sparse edge on the guide path whose endpoints are now
        joined by a dense-only path across its span; returns the count removed.
        """
        removed = 0
        vertices = guide.vertices
        for u, v in zip(vertices[:-1], vertices[1:]):
            if v.layer - u.layer < 2:
                continue
            block = self._sparse.get((u.layer, v.layer))
            if (
                block is None
                or u.slot >= block.kind_code.shape[0]
                or v.slot >= block.kind_code.shape[1]
                or block.kind_code[u.slot, v.slot] == _NONE
                or block.removed[u.slot, v.slot]
            ):
                raise ValueError(f"guide edge {u}->{v} is not a live sparse edge")
            if self._dense_reachable(u, v):
                block.removed[u.slot, v.slot] = True
                removed += 1
        return removed

    # -- inspection --------------------------------------------------------

    def blocks_into(self, x2: int):
        """Incoming (source_layer, block, is_sparse) triples, ascending source."""
        out = []
        if x2 - 1 in self._dense:
            out.append((x2 - 1, self._dense[x2 - 1], False))
        for (x, tx2), block in self._sparse.items():
            if tx2 == x2:
                out.append((x, block, True))
        out.sort(key=lambda item: item[0])
        return out

    def _block_kind(self, is_sparse: bool, code: int) -> EdgeKind:
        if code == _PLAIN:
            return EdgeKind.SPARSE if is_sparse else EdgeKind.DENSE
        return EdgeKind.SPARSE_RECONFIG if is_sparse else EdgeKind.DENSE_RECONFIG

    def _edges_from_block(
        self, x: int, x2: int, block: _Block, is_sparse: bool, slot: int
    ) -> Iterator[Edge]:
        if slot >= block.kind_code.shape[0]:
            return
        present = block.present()[slot]
        for t in np.nonzero(present)[0]:
            code = int(block.kind_code[slot, t])
            yield Edge(
                VertexId(x, slot),
                VertexId(x2, int(t)),
                self._block_kind(is_sparse, code),
                float(block.movement[slot, t]),
            )

    def edges_from(self, vid: VertexId) -> list[Edge]:
        """Adjacency view: all live edges leaving a vertex."""
        out: list[Edge] = []
        x = vid.layer
        if x in self._dense:
            out.extend(self._edges_from_block(x, x + 1, self._dense[x], False, vid.slot))
        for (sx, sx2), block in sorted(self._sparse.items()):
            if sx == x:
                out.extend(self._edges_from_block(sx, sx2, block, True, vid.slot))
        return out

    def edge_between(self, u: VertexId, v: VertexId) -> Edge | None:
        if v.layer == u.layer + 1:
            block, is_sparse = self._dense.get(u.layer), False
        else:
            block, is_sparse = self._sparse.get((u.layer, v.layer)), True
        if block is None:
            return None
        if u.slot >= block.kind_code.shape[0] or v.slot >= block.kind_code.shape[1]:
            return None
        if not block.present()[u.slot, v.slot]:
            return None
        code = int(block.kind_code[u.slot, v.slot])
        return Edge(u, v, self._block_kind(is_sparse, code), float(block.movement[u.slot, v.slot]))

    def edge_counts(self) -> dict[str, int]:
        counts = {k.value: 0 for k in EdgeKind}
        for block in self._dense.values():
            present = block.present()
            n_plain = int(((block.kind_code == _PLAIN) & present).sum())
            n_rc = int(((block.kind_code == _RECONFIG) & present).sum())
            counts[EdgeKind.DENSE.value] += n_plain
            counts[EdgeKind.DENSE_RECONFIG.value] += n_rc
        for block in self._sparse.values():
            present = block.present()
            counts[EdgeKind.SPARSE.value] += int(((block.kind_code == _PLAIN) & present).sum())
            counts[EdgeKind.SPARSE_RECONFIG.value] += int(
                ((block.kind_code == _RECONFIG) & present).sum()
            )
        return counts

    def summary(self) -> dict:
        return {"layer_sizes": self.layer_sizes(), "edge_counts": self.edge_counts()}

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2)
