import numpy as np
import pytest

from iktrack.graph import EdgeKind, LayeredGraph, VertexId, edge_feasible
from iktrack.kinematics import KinematicChain
from iktrack.trajectory import Trajectory


def make_chain(dof=2, vel=1.0):
    return KinematicChain(
        name="test",
        a=[0.5] * dof, alpha=[0.0] * dof, d=[0.0] * dof, theta_offset=[0.0] * dof,
        pos_lower=[-np.pi] * dof, pos_upper=[np.pi] * dof, vel_max=[vel] * dof,
    )


def make_traj(n=4, dt=0.1):
    t = np.arange(n) * dt
    pos = np.zeros((n, 3))
    pos[:, 0] = np.linspace(0, 0.04 * (n - 1), n)
    quat = np.tile([1.0, 0, 0, 0], (n, 1))
    return Trajectory(t, pos, quat)


def brute_force_reachable(graph, u, v):
    """Independent BFS over dense edges using the adjacency API."""
    frontier = {u}
    for _ in range(u.layer, v.layer):
        nxt = set()
        for node in frontier:
            for e in graph.edges_from(node):
                if not e.kind.is_sparse and e.target.layer <= v.layer:
                    nxt.add(e.target)
        frontier = nxt
        if not frontier:
            return False
    return v in frontier


class TestEdgeFeasible:
    def test_equal_configs_always_feasible(self):
        chain = make_chain()
        assert edge_feasible([0.1, 0.2], [0.1, 0.2], 1e-6, chain)

    def test_boundary_inclusive(self):
        chain = make_chain(dof=1, vel=1.0)
        assert edge_feasible([0.0], [0.1], 0.1, chain)

    def test_just_over_boundary(self):
        chain = make_chain(dof=1, vel=1.0)
        assert not edge_feasible([0.0], [0.11], 0.1, chain)

    def test_bad_dt(self):
        with pytest.raises(ValueError):
            edge_feasible([0.0], [0.0], 0.0, make_chain(dof=1))


class TestAddVertices:
    def test_dedup_on_repeat(self):
        g = LayeredGraph(make_traj())
        first = g.add_vertices(0, [[0.1, 0.2]])
        assert first == [VertexId(0, 0)]
        again = g.add_vertices(0, [[0.1, 0.2]])
        assert again == []

    def test_distinct_configs_get_sequential_slots(self):
        g = LayeredGraph(make_traj())
        ids = g.add_vertices(1, [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        assert ids == [VertexId(1, 0), VertexId(1, 1), VertexId(1, 2)]

    def test_interleaved_adds_preserve_order(self):
        g = LayeredGraph(make_traj())
        g.add_vertices(0, [[0.0, 0.0]])
        g.add_vertices(0, [[1.0, 0.0]])
        ids = g.add_vertices(0, [[0.0, 0.001], [2.0, 0.0]])  # first is a duplicate
        assert ids == [VertexId(0, 2)]
        np.testing.assert_allclose(g.vertex_config(VertexId(0, 1)), [1.0, 0.0])

    def test_empty_input(self):
        g = LayeredGraph(make_traj())
        assert g.add_vertices(0, np.zeros((0, 2))) == []


class TestConnectDense:
    def test_empty_layers_no_edges(self):
        g = LayeredGraph(make_traj())
        assert g.connect_dense(0, make_chain(), allow_reconfig=False) == 0

    def test_complete_bipartite_when_feasible(self):
        g = LayeredGraph(make_traj(dt=10.0))  # huge dt: everything feasible
        g.add_vertices(0, [[0.0, 0.0], [1.0, 0.0]])
        g.add_vertices(1, [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        added = g.connect_dense(0, make_chain(), allow_reconfig=False)
        assert added == 6
        assert g.edge_counts()["dense"] == 6

    def test_idempotent(self):
        g = LayeredGraph(make_traj(dt=10.0))
        g.add_vertices(0, [[0.0, 0.0]])
        g.add_vertices(1, [[0.5, 0.0]])
        assert g.connect_dense(0, make_chain(), False) == 1
        assert g.connect_dense(0, make_chain(), False) == 0

    def test_incremental_after_vertex_growth(self):
        chain = make_chain()
        g = LayeredGraph(make_traj(dt=10.0))
        g.add_vertices(0, [[0.0, 0.0]])
        g.add_vertices(1, [[0.1, 0.0]])
        assert g.connect_dense(0, chain, False) == 1
        g.add_vertices(0, [[1.0, 1.0]])
        g.add_vertices(1, [[2.0, 0.0]])
        assert g.connect_dense(0, chain, False) == 3  # the three new pairs
        assert g.edge_counts()["dense"] == 4

    def test_kinds_match_per_pair_oracle(self):
        rng = np.random.default_rng(0)
        chain = make_chain(dof=3, vel=1.0)
        traj = make_traj(n=3, dt=0.5)
        g = LayeredGraph(traj)
        qa = rng.uniform(-1, 1, size=(4, 3))
        qb = rng.uniform(-1, 1, size=(5, 3))
        g.add_vertices(0, qa)
        g.add_vertices(1, qb)
        g.connect_dense(0, chain, allow_reconfig=True)
        for i in range(4):
            for j in range(5):
                e = g.edge_between(VertexId(0, i), VertexId(1, j))
                assert e is not None  # reconfig fallback connects every pair
                feas = edge_feasible(qa[i], qb[j], traj.delta_t(0, 1), chain)
                expected = EdgeKind.DENSE if feas else EdgeKind.DENSE_RECONFIG
                assert e.kind is expected
                assert e.movement == pytest.approx(np.linalg.norm(qb[j] - qa[i]), abs=1e-12)
                assert e.reconfig == (0 if feas else 1)

    def test_reconfig_upgrade_on_later_call(self):
        chain = make_chain(dof=1, vel=0.1)
        g = LayeredGraph(make_traj(n=2, dt=0.1))
        g.add_vertices(0, [[0.0]])
        g.add_vertices(1, [[3.0]])  # infeasible jump
        assert g.connect_dense(0, chain, allow_reconfig=False) == 0
        assert g.connect_dense(0, chain, allow_reconfig=True) == 1
        e = g.edge_between(VertexId(0, 0), VertexId(1, 0))
        assert e.kind is EdgeKind.DENSE_RECONFIG


class TestConnectSparse:
    def test_mirrors_dense_rules(self):
        rng = np.random.default_rng(1)
        chain = make_chain(dof=2, vel=1.0)
        traj = make_traj(n=5, dt=0.2)
        g = LayeredGraph(traj, sparse_step=3)
        qa = rng.uniform(-1, 1, size=(3, 2))
        qb = rng.uniform(-1, 1, size=(3, 2))
        g.add_vertices(0, qa)
        g.add_vertices(3, qb)
        g.connect_sparse(0, 3, chain, allow_reconfig=True)
        for i in range(3):
            for j in range(3):
                e = g.edge_between(VertexId(0, i), VertexId(3, j))
                feas = edge_feasible(qa[i], qb[j], traj.delta_t(0, 3), chain)
                assert e.kind is (EdgeKind.SPARSE if feas else EdgeKind.SPARSE_RECONFIG)

    def test_empty_layers(self):
        g = LayeredGraph(make_traj(n=5))
        assert g.connect_sparse(0, 3, make_chain(), False) == 0

    def test_single_layer_span_becomes_dense(self):
        g = LayeredGraph(make_traj(n=3, dt=10.0))
        g.add_vertices(1, [[0.0, 0.0]])
        g.add_vertices(2, [[0.1, 0.0]])
        g.connect_sparse(1, 2, make_chain(), False)
        e = g.edge_between(VertexId(1, 0), VertexId(2, 0))
        assert e.kind is EdgeKind.DENSE

    def test_invalid_span(self):
        g = LayeredGraph(make_traj(n=3))
        with pytest.raises(IndexError):
            g.connect_sparse(2, 1, make_chain(), False)


class GuideStub:
    def __init__(self, vertices):
        self.vertices = vertices


class TestSupersedeSparse:
    def _setup(self, with_mid_vertex=True, vel=10.0):
        chain = make_chain(dof=2, vel=vel)
        traj = make_traj(n=3, dt=0.5)
        g = LayeredGraph(traj, sparse_step=2)
        g.add_vertices(0, [[0.0, 0.0]])
        g.add_vertices(2, [[0.2, 0.0]])
        g.connect_sparse(0, 2, chain, allow_reconfig=False)
        if with_mid_vertex:
            g.add_vertices(1, [[0.1, 0.0]])
            g.connect_dense(0, chain, False)
            g.connect_dense(1, chain, False)
        return g, chain

    def test_no_sparse_edges_on_guide(self):
        g, chain = self._setup()
        guide = GuideStub([VertexId(0, 0), VertexId(1, 0), VertexId(2, 0)])
        assert g.supersede_sparse(guide) == 0

    def test_superseded_when_dense_path_exists(self):
        g, _ = self._setup(with_mid_vertex=True)
        u, v = VertexId(0, 0), VertexId(2, 0)
        assert brute_force_reachable(g, u, v)
        guide = GuideStub([u, v])
        assert g.supersede_sparse(guide) == 1
        assert g.edge_between(u, v) is None
        assert g.edge_counts()["sparse"] == 0

    def test_retained_when_intermediate_layer_empty(self):
        g, _ = self._setup(with_mid_vertex=False)
        u, v = VertexId(0, 0), VertexId(2, 0)
        guide = GuideStub([u, v])
        assert g.supersede_sparse(guide) == 0
        assert g.edge_between(u, v) is not None

    def test_retained_when_dense_infeasible(self):
        # IK succeeded at the midpoint but velocity feasibility fails there
        chain = make_chain(dof=2, vel=1.0)
        traj = make_traj(n=3, dt=0.5)
        g = LayeredGraph(traj)
        g.add_vertices(0, [[0.0, 0.0]])
        g.add_vertices(2, [[0.8, 0.0]])
        g.connect_sparse(0, 2, chain, allow_reconfig=False)  # |0.8| <= 1.0*1.0
        g.add_vertices(1, [[5.0, 5.0]])  # unreachable detour vertex
        g.connect_dense(0, chain, False)
        g.connect_dense(1, chain, False)
        u, v = VertexId(0, 0), VertexId(2, 0)
        assert not brute_force_reachable(g, u, v)
        assert g.supersede_sparse(GuideStub([u, v])) == 0
        assert g.edge_between(u, v) is not None

    def test_matches_bfs_oracle_on_random_graphs(self):
        rng = np.random.default_rng(7)
        for trial in range(20):
            chain = make_chain(dof=2, vel=rng.uniform(0.5, 2.0))
            n = 4
            traj = make_traj(n=n, dt=0.4)
            g = LayeredGraph(traj, sparse_step=3)
            for x in range(n):
                cnt = rng.integers(0, 4)
                if cnt:
                    g.add_vertices(x, rng.uniform(-1, 1, size=(cnt, 2)))
            if g.layer_size(0) == 0 or g.layer_size(3) == 0:
                continue
            g.connect_sparse(0, 3, chain, allow_reconfig=True)
            for x in range(n - 1):
                g.connect_dense(x, chain, allow_reconfig=False)
            u, v = VertexId(0, 0), VertexId(3, 0)
            expected = brute_force_reachable(g, u, v)
            removed = g.supersede_sparse(GuideStub([u, v]))
            assert removed == (1 if expected else 0)

    def test_invalid_guide_edge_rejected(self):
        g, _ = self._setup()
        with pytest.raises(ValueError):
            g.supersede_sparse(GuideStub([VertexId(0, 0), VertexId(2, 5)]))


class TestInvariants:
    def test_monotone_growth(self):
        rng = np.random.default_rng(3)
        chain = make_chain(dof=2, vel=1.0)
        g = LayeredGraph(make_traj(n=4, dt=0.3))
        prev_vertices, prev_dense = 0, 0
        for _ in range(10):
            x = int(rng.integers(0, 4))
            g.add_vertices(x, rng.uniform(-1, 1, size=(rng.integers(1, 3), 2)))
            for xx in range(3):
                g.connect_dense(xx, chain, allow_reconfig=bool(rng.integers(2)))
            counts = g.edge_counts()
            vertices = sum(g.layer_sizes())
            dense = counts["dense"] + counts["dense_reconfig"]
            assert vertices >= prev_vertices
            assert dense >= prev_dense
            prev_vertices, prev_dense = vertices, dense

    def test_sparse_admissibility_triangle(self):
        # any sparse edge's movement lower-bounds every dense path across its span
        rng = np.random.default_rng(11)
        chain = make_chain(dof=3, vel=50.0)
        traj = make_traj(n=4, dt=0.3)
        g = LayeredGraph(traj, sparse_step=3)
        for x in range(4):
            g.add_vertices(x, rng.uniform(-2, 2, size=(3, 3)))
        g.connect_sparse(0, 3, chain, True)
        for x in range(3):
            g.connect_dense(x, chain, True)

        def dense_paths(node, end_layer):
            if node.layer == end_layer:
                yield [node], 0.0
                return
            for e in g.edges_from(node):
                if e.kind.is_sparse:
                    continue
                for tail, cost in dense_paths(e.target, end_layer):
                    yield [node] + tail, cost + e.movement

        for i in range(3):
            for j in range(3):
                sparse = g.edge_between(VertexId(0, i), VertexId(3, j))
                for path, cost in dense_paths(VertexId(0, i), 3):
                    if path[-1] == VertexId(3, j):
                        assert sparse.movement <= cost + 1e-12

    def test_with_reconfig_every_layer_connected(self):
        rng = np.random.default_rng(5)
        chain = make_chain(dof=2, vel=0.01)  # nothing feasible
        g = LayeredGraph(make_traj(n=3, dt=0.1))
        for x in range(3):
            g.add_vertices(x, rng.uniform(-1, 1, size=(2, 2)))
        for x in range(2):
            g.connect_dense(x, chain, allow_reconfig=True)
        assert brute_force_reachable(g, VertexId(0, 0), VertexId(2, 0))

    def test_summary(self):
        g = LayeredGraph(make_traj(n=3, dt=10.0))
        g.add_vertices(0, [[0.0, 0.0]])
        g.add_vertices(1, [[0.1, 0.0]])
        g.connect_dense(0, make_chain(), False)
        s = g.summary()
        assert s["layer_sizes"] == [1, 1, 0]
        assert s["edge_counts"]["dense"] == 1
        import json
        assert json.loads(g.summary_json()) == s
