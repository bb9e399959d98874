"""Serial-chain forward kinematics (standard Denavit-Hartenberg) and
end-effector path extraction for path-distance rewards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class DHJoint:
    """One standard DH row: link length a, offset d, twist alpha, theta offset."""

    a: float
    d: float
    alpha: float
    theta_offset: float = 0.0


@dataclass(frozen=True)
class DHChain:
    joints: tuple[DHJoint, ...]

    def __post_init__(self):
        if len(self.joints) < 1:
            raise ValueError("chain needs at least one joint")
        for j in self.joints:
            vals = (j.a, j.d, j.alpha, j.theta_offset)
            if not all(np.isfinite(v) for v in vals):
                raise ValueError(f"non-finite DH parameters: {j}")

    @property
    def num_joints(self) -> int:
        return len(self.joints)


@dataclass(frozen=True)
class JointTrajectory:
    """Rectangular (timesteps, joints) positions with optional gripper channel."""

    positions: np.ndarray
    gripper: np.ndarray | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2:
            raise ValueError(f"positions must be (timesteps, joints), got {pos.shape}")
        if not np.isfinite(pos).all():
            raise ValueError("trajectory contains non-finite joint values")
        object.__setattr__(self, "positions", pos)
        if self.gripper is not None:
            g = np.asarray(self.gripper, dtype=float)
            if g.shape != (pos.shape[0],):
                raise ValueError("gripper channel length must match timesteps")
            object.__setattr__(self, "gripper", g)

    @property
    def timesteps(self) -> int:
        return self.positions.shape[0]

    @property
    def num_joints(self) -> int:
        return self.positions.shape[1]


def dh_transforms(chain: DHChain, q: np.ndarray) -> np.ndarray:
    """Per-joint standard DH transforms, vectorized: q (..., J) -> (..., J, 4, 4)."""
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != chain.num_joints:
        raise ValueError(
            f"joint vector has {q.shape[-1]} entries, chain has {chain.num_joints}")
    theta = q + np.array([j.theta_offset for j in chain.joints])
    a = np.array([j.a for j in chain.joints])
    d = np.array([j.d for j in chain.joints])
    alpha = np.array([j.alpha for j in chain.joints])
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)

    T = np.zeros(q.shape[:-1] + (chain.num_joints, 4, 4))
    T[..., 0, 0] = ct
    T[..., 0, 1] = -st * ca
    T[..., 0, 2] = st * sa
    T[..., 0, 3] = a * ct
    T[..., 1, 0] = st
    T[..., 1, 1] = ct * ca
    T[..., 1, 2] = -ct * sa
    T[..., 1, 3] = a * st
    T[..., 2, 1] = sa
    T[..., 2, 2] = ca
    T[..., 2, 3] = d
    T[..., 3, 3] = 1.0
    return T


def fk_pose(chain: DHChain, q) -> np.ndarray:
    """Full 4x4 pose(s) of the final frame; q may be (J,) or (..., J)."""
    T = dh_transforms(chain, q)
    pose = T[..., 0, :, :]
    for i in range(1, chain.num_joints):
        pose = pose @ T[..., i, :, :]
    return pose


def fk_position(chain: DHChain, q) -> np.ndarray:
    """Translation of the final frame, shape (3,) or (..., 3)."""
    return fk_pose(chain, q)[..., :3, 3]


def ee_path(chain: DHChain, traj) -> np.ndarray:
    """End-effector polyline of a trajectory, shape (timesteps, 3)."""
    pos = traj.positions if isinstance(traj, JointTrajectory) else np.asarray(traj, dtype=float)
    return fk_position(chain, pos)


def denormalize_actions(chunk, limits) -> np.ndarray:
    """Affine map from normalized [-1, 1] values to per-joint [lo, hi] ranges.

    Out-of-range inputs are clamped. ``limits`` is (J, 2) rows of (lo, hi).
    """
    chunk = np.clip(np.asarray(chunk, dtype=float), -1.0, 1.0)
    limits = np.asarray(limits, dtype=float)
    lo, hi = limits[:, 0], limits[:, 1]
    return lo + (chunk + 1.0) * 0.5 * (hi - lo)


def normalize_actions(joints, limits) -> np.ndarray:
    """Inverse of :func:`denormalize_actions` (result clamped to [-1, 1])."""
    limits = np.asarray(limits, dtype=float)
    lo, hi = limits[:, 0], limits[:, 1]
    return np.clip((np.asarray(joints, dtype=float) - lo) / (hi - lo) * 2.0 - 1.0,
                   -1.0, 1.0)


@dataclass(frozen=True)
class ChainDescription:
    """A chain plus the metadata shipped in its config file."""

    name: str
    chain: DHChain
    joint_limits: np.ndarray  # (J, 2)

    def __post_init__(self):
        lim = np.asarray(self.joint_limits, dtype=float)
        if lim.shape != (self.chain.num_joints, 2):
            raise ValueError("joint_limits must be (num_joints, 2)")
        if (lim[:, 1] <= lim[:, 0]).any():
            raise ValueError("each joint limit needs hi > lo")
        object.__setattr__(self, "joint_limits", lim)


def load_chain(path) -> ChainDescription:
    """Read a chain description file (JSON with a convention tag)."""
    path = Path(path)
    with open(path) as f:
        raw = json.load(f)
    convention = raw.get("convention")
    if convention != "standard_dh":
        raise ValueError(
            f"{path}: unsupported kinematics convention {convention!r} "
            "(expected 'standard_dh')")
    joints = tuple(
        DHJoint(a=float(j["a"]), d=float(j["d"]), alpha=float(j["alpha"]),
                theta_offset=float(j.get("theta_offset", 0.0)))
        for j in raw["joints"])
    return ChainDescription(name=raw.get("name", path.stem),
                            chain=DHChain(joints),
                            joint_limits=np.asarray(raw["joint_limits"], dtype=float))


def save_chain(path, desc: ChainDescription) -> None:
    payload = {
        "name": desc.name,
        "convention": "standard_dh",
        "joints": [
            {"a": j.a, "d": j.d, "alpha": j.alpha, "theta_offset": j.theta_offset}
            for j in desc.chain.joints
        ],
        "joint_limits": [[float(lo), float(hi)] for lo, hi in desc.joint_limits],
    }
    with open(Path(path), "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")


def builtin_chain_path(name: str) -> Path:
    """Path of a chain description shipped with the package (e.g. 'ur5e')."""
    return Path(__file__).parent / "data" / f"{name}.json"
