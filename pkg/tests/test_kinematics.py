import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from gazesim.kinematics import (ChainDescription, DHChain, DHJoint,
                                JointTrajectory, builtin_chain_path,
                                denormalize_actions, ee_path, fk_pose,
                                fk_position, load_chain, normalize_actions,
                                save_chain)
from gazesim.rewards import discrete_frechet


def sympy_dh_fk(rows, q_values):
    """Independent symbolic FK oracle: exact DH matrices multiplied in sympy."""
    T = sp.eye(4)
    for (a, d, alpha, off), q in zip(rows, q_values):
        th = sp.Float(q, 30) + sp.Float(off, 30)
        a, d, alpha = sp.Float(a, 30), sp.Float(d, 30), sp.Float(alpha, 30)
        Ti = sp.Matrix([
            [sp.cos(th), -sp.sin(th) * sp.cos(alpha), sp.sin(th) * sp.sin(alpha), a * sp.cos(th)],
            [sp.sin(th), sp.cos(th) * sp.cos(alpha), -sp.cos(th) * sp.sin(alpha), a * sp.sin(th)],
            [0, sp.sin(alpha), sp.cos(alpha), d],
            [0, 0, 0, 1],
        ])
        T = T * Ti
    return np.array([float(T[i, 3]) for i in range(3)])


def test_single_planar_link():
    chain = DHChain((DHJoint(a=1.0, d=0.0, alpha=0.0),))
    assert np.allclose(fk_position(chain, [0.0]), [1.0, 0.0, 0.0])


def test_two_joint_planar_symbolic_oracle():
    rows = [(1.0, 0.0, 0.0, 0.0), (1.0, 0.0, 0.0, 0.0)]
    chain = DHChain(tuple(DHJoint(*r) for r in rows))
    q = [math.pi / 2, -math.pi / 2]
    expected = sympy_dh_fk(rows, q)
    assert np.allclose(fk_position(chain, q), expected, atol=1e-12)


def test_ur5e_zero_configuration_matches_oracle():
    desc = load_chain(builtin_chain_path("ur5e"))
    rows = [(j.a, j.d, j.alpha, j.theta_offset) for j in desc.chain.joints]
    expected = sympy_dh_fk(rows, [0.0] * 6)
    assert np.allclose(fk_position(desc.chain, np.zeros(6)), expected, atol=1e-9)


def test_fk_pose_batched_matches_loop():
    desc = load_chain(builtin_chain_path("ur5e"))
    rng = np.random.default_rng(0)
    qs = rng.uniform(-math.pi, math.pi, size=(7, 6))
    batched = fk_position(desc.chain, qs)
    for i in range(7):
        assert np.allclose(batched[i], fk_position(desc.chain, qs[i]))


def test_joint_count_mismatch_rejected():
    chain = DHChain((DHJoint(1.0, 0.0, 0.0),))
    with pytest.raises(ValueError):
        fk_position(chain, [0.0, 0.0])


def test_ee_path_constant_trajectory():
    chain = DHChain((DHJoint(1.0, 0.0, 0.0), DHJoint(0.5, 0.0, 0.0)))
    traj = JointTrajectory(np.tile([0.3, -0.2], (6, 1)))
    path = ee_path(chain, traj)
    assert path.shape == (6, 3)
    assert np.allclose(path, path[0])


def test_ee_path_two_step_against_oracle():
    rows = [(1.0, 0.0, 0.0, 0.0)]
    chain = DHChain((DHJoint(*rows[0]),))
    traj = JointTrajectory(np.array([[0.0], [math.pi / 2]]))
    path = ee_path(chain, traj)
    assert np.allclose(path[0], sympy_dh_fk(rows, [0.0]), atol=1e-12)
    assert np.allclose(path[1], sympy_dh_fk(rows, [math.pi / 2]), atol=1e-12)


def test_full_revolution_arc_length():
    chain = DHChain((DHJoint(a=0.7, d=0.0, alpha=0.0),))
    q = np.linspace(0.0, 2 * math.pi, 361)[:, None]
    path = ee_path(chain, q)
    length = np.linalg.norm(np.diff(path, axis=0), axis=1).sum()
    assert abs(length - 2 * math.pi * 0.7) / (2 * math.pi * 0.7) < 1e-3


def test_base_rotation_equivariance():
    # rotating the first joint's offset by beta rotates every path point by
    # R_z(beta) in the base frame
    chain = DHChain((DHJoint(0.4, 0.2, math.pi / 2), DHJoint(0.3, 0.0, 0.0)))
    beta = 0.7
    rotated = DHChain((DHJoint(0.4, 0.2, math.pi / 2, theta_offset=beta),
                       DHJoint(0.3, 0.0, 0.0)))
    rz = np.array([[math.cos(beta), -math.sin(beta), 0.0],
                   [math.sin(beta), math.cos(beta), 0.0],
                   [0.0, 0.0, 1.0]])
    rng = np.random.default_rng(1)
    for _ in range(20):
        q = rng.uniform(-math.pi, math.pi, 2)
        assert np.allclose(fk_position(rotated, q), rz @ fk_position(chain, q),
                           atol=1e-12)


def spatial_midpoint_refine(path):
    mids = (path[:-1] + path[1:]) / 2.0
    refined = np.empty((path.shape[0] * 2 - 1, path.shape[1]))
    refined[0::2] = path
    refined[1::2] = mids
    return refined


def test_midpoint_refinement_never_increases_frechet():
    # refining BOTH end-effector polylines with spatial midpoints never
    # increases their discrete Frechet distance (ties allowed); refining one
    # path alone stays within half its longest segment of the original
    chain = DHChain((DHJoint(0.5, 0.1, 0.3), DHJoint(0.4, 0.0, 0.0)))
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = ee_path(chain, rng.uniform(-1.5, 1.5, size=(6, 2)))
        b = ee_path(chain, rng.uniform(-1.5, 1.5, size=(5, 2)))
        base = discrete_frechet(a, b)
        assert discrete_frechet(spatial_midpoint_refine(a),
                                spatial_midpoint_refine(b)) <= base + 1e-12
        half_seg = np.linalg.norm(np.diff(a, axis=0), axis=1).max() / 2.0
        assert discrete_frechet(spatial_midpoint_refine(a), a) <= half_seg + 1e-12


class TestActionNormalization:
    LIMITS = np.array([[-2.0, 1.0], [0.0, 4.0]])

    def test_zero_maps_to_midpoint(self):
        assert np.allclose(denormalize_actions([0.0, 0.0], self.LIMITS),
                           [-0.5, 2.0])

    def test_minus_one_maps_to_lo(self):
        assert np.allclose(denormalize_actions([-1.0, -1.0], self.LIMITS),
                           [-2.0, 0.0])

    def test_out_of_range_clamped(self):
        assert np.allclose(denormalize_actions([-1.5, 2.0], self.LIMITS),
                           [-2.0, 4.0])

    @given(st.lists(st.floats(-1.0, 1.0), min_size=2, max_size=2))
    @settings(max_examples=200, deadline=None)
    def test_round_trip_identity(self, vals):
        joints = denormalize_actions(vals, self.LIMITS)
        back = normalize_actions(joints, self.LIMITS)
        assert np.abs(back - np.array(vals)).max() < 1e-12

    def test_chunk_shapes_pass_through(self):
        chunk = np.zeros((30, 2))
        out = denormalize_actions(chunk, self.LIMITS)
        assert out.shape == (30, 2)


class TestChainIO:
    def test_round_trip(self, tmp_path):
        desc = ChainDescription(
            name="toy", chain=DHChain((DHJoint(1.0, 0.5, 0.25, 0.1),)),
            joint_limits=np.array([[-1.0, 1.0]]))
        save_chain(tmp_path / "toy.json", desc)
        loaded = load_chain(tmp_path / "toy.json")
        assert loaded.name == "toy"
        assert loaded.chain == desc.chain
        assert np.array_equal(loaded.joint_limits, desc.joint_limits)

    def test_rejects_unknown_convention(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x", "convention": "modified_dh", '
                        '"joints": [], "joint_limits": []}')
        with pytest.raises(ValueError, match="convention"):
            load_chain(path)

    def test_trajectory_validation(self):
        with pytest.raises(ValueError):
            JointTrajectory(np.array([[0.0, np.inf]]))
        with pytest.raises(ValueError):
            JointTrajectory(np.zeros((4, 2)), gripper=np.zeros(3))
