import numpy as np
import pytest

from iktrack.ik import (
    EPS_MERGE,
    IkSettings,
    merge_similar,
    sample_ik_targeted,
    sample_ik_uniform,
    solve_ik,
    solve_ik_batch,
)
from iktrack.kinematics import (
    Pose,
    forward_kinematics,
    pose_error,
    preset_chain,
)


@pytest.fixture(scope="module")
def planar3r():
    return preset_chain("planar_3r")


@pytest.fixture(scope="module")
def arm7():
    return preset_chain("arm_7dof")


# --- analytic oracle for the planar 3R at a pure-position target -------------
#
# With the tool orientation unconstrained in-plane we cannot use it directly,
# but for a *fully constrained* planar pose (x, y, yaw) the wrist point is
# fixed and a standard two-link elbow solution gives exactly two families.

def planar_pose(x, y, yaw):
    return Pose([x, y, 0.0], [np.cos(yaw / 2), 0.0, 0.0, np.sin(yaw / 2)])


def planar_3r_solutions(x, y, yaw, l1=1.0, l2=1.0, l3=1.0):
    """Enumerate the (up to two) exact solutions for a planar 3R pose task."""
    wx, wy = x - l3 * np.cos(yaw), y - l3 * np.sin(yaw)
    r2 = wx * wx + wy * wy
    c2 = (r2 - l1 * l1 - l2 * l2) / (2 * l1 * l2)
    if abs(c2) > 1.0:
        return []
    sols = []
    for sign in (+1.0, -1.0):
        s2 = sign * np.sqrt(max(0.0, 1.0 - c2 * c2))
        q2 = np.arctan2(s2, c2)
        q1 = np.arctan2(wy, wx) - np.arctan2(l2 * s2, l1 + l2 * c2)
        q3 = yaw - q1 - q2
        q3 = (q3 + np.pi) % (2 * np.pi) - np.pi
        sols.append(np.array([q1, q2, q3]))
    uniq = []
    for s in sols:
        if not any(np.allclose(s, u, atol=1e-9) for u in uniq):
            uniq.append(s)
    return uniq


class TestSolveIk:
    def test_fixed_point_returns_seed(self, planar3r):
        seed = np.array([0.3, -0.4, 0.2])
        target = forward_kinematics(planar3r, seed)
        out = solve_ik(planar3r, target, seed)
        np.testing.assert_array_equal(out, seed)

    def test_converges_near_seed(self, planar3r):
        target = planar_pose(2.9, 0.1, 0.0)
        out = solve_ik(planar3r, target, [0.1, 0.1, 0.1])
        assert out is not None
        reached = forward_kinematics(planar3r, out)
        np.testing.assert_allclose(reached.position[:2], [2.9, 0.1], atol=2e-4)

    def test_unreachable_target_fails(self, planar3r):
        out = solve_ik(planar3r, planar_pose(10.0, 0.0, 0.0), [0.1, 0.2, 0.3])
        assert out is None

    def test_result_within_limits_and_tolerance(self, arm7):
        rng = np.random.default_rng(2)
        target = forward_kinematics(arm7, rng.uniform(arm7.pos_lower, arm7.pos_upper) * 0.5)
        st = IkSettings()
        seeds = rng.uniform(arm7.pos_lower, arm7.pos_upper, size=(40, 7))
        Q, done = solve_ik_batch(arm7, target, seeds, st)
        assert done.sum() > 0
        for q in Q[done]:
            assert arm7.within_limits(q)
            err = pose_error(forward_kinematics(arm7, q), target, arm7.tolerance)
            assert np.all(np.abs(err[:3]) <= st.pos_tol)
            assert np.all(np.abs(err[3:]) <= st.rot_tol)

    def test_batch_matches_single(self, planar3r):
        rng = np.random.default_rng(4)
        target = planar_pose(1.5, 1.0, 0.5)
        seeds = rng.uniform(planar3r.pos_lower, planar3r.pos_upper, size=(10, 3))
        Q, done = solve_ik_batch(planar3r, target, seeds)
        for i in range(10):
            single = solve_ik(planar3r, target, seeds[i])
            if single is None:
                assert not done[i]
            else:
                assert done[i]
                np.testing.assert_allclose(Q[i], single, atol=1e-12)

    def test_seed_dimension_mismatch(self, planar3r):
        with pytest.raises(ValueError):
            solve_ik(planar3r, planar_pose(1, 1, 0), [0.0, 0.0])

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            IkSettings(max_iters=0)
        with pytest.raises(ValueError):
            IkSettings(damping=-1.0)


class TestSampleUniform:
    def test_zero_count(self, planar3r):
        out = sample_ik_uniform(planar3r, planar_pose(2, 0, 0), 0, np.random.default_rng(0))
        assert out.shape[0] == 0

    def test_unreachable_gives_empty(self, planar3r):
        out = sample_ik_uniform(planar3r, planar_pose(10, 0, 0), 30, np.random.default_rng(0))
        assert out.shape[0] == 0

    def test_finds_both_elbow_families(self, planar3r):
        target = planar_pose(2.0, 0.0, 0.8)
        expected = planar_3r_solutions(2.0, 0.0, 0.8)
        assert len(expected) == 2
        out = sample_ik_uniform(planar3r, target, 50, np.random.default_rng(1))
        assert out.shape[0] >= 1
        # every returned solution matches one of the analytic family members
        for q in out:
            assert any(np.allclose(q, e, atol=5e-3) for e in expected)
        # with 50 seeds both families should appear
        hits = {
            i for i, e in enumerate(expected)
            if any(np.allclose(q, e, atol=5e-3) for q in out)
        }
        assert hits == {0, 1}

    def test_determinism(self, arm7):
        target = forward_kinematics(arm7, arm7.mid_config() * 0.7)
        a = sample_ik_uniform(arm7, target, 25, np.random.default_rng(99))
        b = sample_ik_uniform(arm7, target, 25, np.random.default_rng(99))
        np.testing.assert_array_equal(a, b)

    def test_pairwise_distance_exceeds_merge_radius(self, arm7):
        target = forward_kinematics(arm7, arm7.mid_config() * 0.6)
        out = sample_ik_uniform(arm7, target, 40, np.random.default_rng(3))
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                assert np.abs(out[i] - out[j]).max() > EPS_MERGE


class TestSampleTargeted:
    def test_zero_stddev_collapses(self, planar3r):
        target = planar_pose(2.0, 0.0, 0.8)
        anchor = planar_3r_solutions(2.0, 0.0, 0.8)[0]
        out = sample_ik_targeted(planar3r, target, anchor, 0.0, 10, np.random.default_rng(0))
        assert out.shape[0] == 1

    def test_anchor_already_solving(self, planar3r):
        target = planar_pose(2.0, 0.0, 0.8)
        anchor = planar_3r_solutions(2.0, 0.0, 0.8)[0]
        out = sample_ik_targeted(planar3r, target, anchor, 0.2, 20, np.random.default_rng(5))
        assert any(np.abs(q - anchor).max() <= 0.5 for q in out)

    def test_stays_in_anchor_family(self, planar3r):
        target = planar_pose(2.0, 0.0, 0.8)
        up, down = planar_3r_solutions(2.0, 0.0, 0.8)
        out = sample_ik_targeted(planar3r, target, up, 0.2, 20, np.random.default_rng(6))
        assert out.shape[0] >= 1
        for q in out:
            assert np.abs(q - up).max() < 0.5
            assert np.allclose(q, up, atol=5e-3)
            assert not np.allclose(q, down, atol=0.1)


class TestMergeSimilar:
    def test_empty(self):
        assert merge_similar(np.zeros((0, 3)), 0.01).shape[0] == 0

    def test_rule_arithmetic(self):
        out = merge_similar([[0.0, 0.0], [0.005, 0.0], [1.0, 0.0]], 0.01)
        np.testing.assert_array_equal(out, [[0.0, 0.0], [1.0, 0.0]])

    def test_zero_radius_keeps_all(self):
        rng = np.random.default_rng(8)
        configs = rng.normal(size=(100, 4))
        out = merge_similar(configs, 0.0)
        np.testing.assert_array_equal(out, configs)

    def test_first_seen_order(self):
        out = merge_similar([[1.0], [0.0], [1.001], [2.0]], 0.01)
        np.testing.assert_array_equal(out, [[1.0], [0.0], [2.0]])
