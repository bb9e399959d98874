"""Demonstration dataset layout and ingestion.

A dataset is a directory of per-episode subdirectories. Each episode holds
a ``manifest.json`` (fps, joint names/limits, file references), the frame
images it references (entries may repeat, e.g. for static scenes), a
whitespace trajectory table ``t q_0 .. q_J [gripper]``, and optionally a
bearing annotation table ``t azimuth elevation [visible]``. A dataset-level
``chain.json`` describes the robot used for kinematic rewards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..kinematics import ChainDescription, JointTrajectory, load_chain
from ..panorama import EquirectPanorama, dir_from_angles, load_panorama
from ..rewards import TargetAnnotation

MANIFEST_NAME = "manifest.json"
CHAIN_NAME = "chain.json"


class DatasetError(ValueError):
    """Malformed dataset content; message names the episode and field."""


@dataclass
class DemoEpisode:
    """Time-synchronized panorama frames and robot trajectory."""

    name: str
    root: Path
    fps: float
    frame_paths: tuple
    timestamps: np.ndarray
    trajectory: JointTrajectory
    joint_names: tuple
    joint_limits: np.ndarray
    annotations: TargetAnnotation | None = None
    cache_size: int = 8
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.frame_paths)

    def frame(self, index: int) -> EquirectPanorama:
        """Decode a frame on demand; repeated paths share one decode."""
        key = str(self.frame_paths[index])
        pano = self._cache.get(key)
        if pano is None:
            pano = load_panorama(self.frame_paths[index])
            if len(self._cache) >= self.cache_size:
                self._cache.pop(next(iter(self._cache)))
            self._cache[key] = pano
        return pano

    def target_direction(self, index: int) -> np.ndarray:
        if self.annotations is None:
            raise DatasetError(f"episode {self.name}: no target annotations")
        return self.annotations.directions[index]


def _read_table(path: Path, episode: str, what: str) -> np.ndarray:
    rows = []
    with open(path) as f:
        for i, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(x) for x in line.split()])
            except ValueError as e:
                raise DatasetError(
                    f"episode {episode}: bad {what} row at {path.name}:{i}: {e}")
    if not rows:
        raise DatasetError(f"episode {episode}: {what} table {path.name} is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DatasetError(
            f"episode {episode}: ragged {what} table {path.name} (widths {sorted(widths)})")
    return np.array(rows)


def load_episode(ep_dir: Path, cache_size: int = 8) -> DemoEpisode:
    ep_dir = Path(ep_dir)
    manifest_path = ep_dir / MANIFEST_NAME
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except FileNotFoundError:
        raise DatasetError(f"episode {ep_dir.name}: missing {MANIFEST_NAME}")
    except json.JSONDecodeError as e:
        raise DatasetError(f"episode {ep_dir.name}: malformed manifest: {e}")

    name = manifest.get("name", ep_dir.name)

    def require(key):
        if key not in manifest:
            raise DatasetError(f"episode {name}: manifest missing field {key!r}")
        return manifest[key]

    fps = float(require("fps"))
    joint_names = tuple(require("joint_names"))
    joint_limits = np.asarray(require("joint_limits"), dtype=float)
    if joint_limits.shape != (len(joint_names), 2):
        raise DatasetError(
            f"episode {name}: joint_limits shape {joint_limits.shape} does not "
            f"match {len(joint_names)} joints")

    frames = [ep_dir / p for p in require("frames")]
    if not frames:
        raise DatasetError(f"episode {name}: empty frame list")
    missing = sorted({str(p) for p in frames if not p.exists()})
    if missing:
        raise DatasetError(f"episode {name}: missing frame files {missing[:3]}")

    table = _read_table(ep_dir / require("trajectory"), name, "trajectory")
    ncols = table.shape[1]
    nj = len(joint_names)
    if ncols == 1 + nj:
        gripper = None
    elif ncols == 2 + nj:
        gripper = table[:, -1]
    else:
        raise DatasetError(
            f"episode {name}: trajectory has {ncols} columns, expected "
            f"{1 + nj} or {2 + nj} for {nj} joints")
    timestamps = table[:, 0]
    if not (np.diff(timestamps) > 0).all():
        raise DatasetError(f"episode {name}: timestamps not strictly increasing")
    trajectory = JointTrajectory(positions=table[:, 1:1 + nj], gripper=gripper)

    if len(frames) != trajectory.timesteps:
        raise DatasetError(
            f"episode {name}: {len(frames)} frames but trajectory has "
            f"{trajectory.timesteps} timesteps")

    annotations = None
    if manifest.get("annotations"):
        ann = _read_table(ep_dir / manifest["annotations"], name, "annotations")
        if ann.shape[0] != len(frames):
            raise DatasetError(
                f"episode {name}: {ann.shape[0]} annotation rows for "
                f"{len(frames)} frames")
        if ann.shape[1] not in (3, 4):
            raise DatasetError(
                f"episode {name}: annotation rows need 't az el [visible]', "
                f"got {ann.shape[1]} columns")
        visible = ann[:, 3].astype(bool) if ann.shape[1] == 4 else None
        annotations = TargetAnnotation(
            directions=dir_from_angles(ann[:, 1], ann[:, 2]), visible=visible)

    return DemoEpisode(name=name, root=ep_dir, fps=fps, frame_paths=tuple(frames),
                       timestamps=timestamps, trajectory=trajectory,
                       joint_names=joint_names, joint_limits=joint_limits,
                       annotations=annotations, cache_size=cache_size)


@dataclass
class DemoDataset:
    root: Path
    episodes: list
    chain: ChainDescription | None = None

    def __len__(self) -> int:
        return len(self.episodes)

    def annotated_episodes(self) -> list:
        return [ep for ep in self.episodes if ep.annotations is not None]


def load_dataset(root, cache_size: int = 8) -> DemoDataset:
    """Load every episode directory under ``root`` (frames decode lazily)."""
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} is not a directory")
    ep_dirs = sorted(p for p in root.iterdir()
                     if p.is_dir() and (p / MANIFEST_NAME).exists())
    if not ep_dirs:
        raise DatasetError(f"dataset root {root} contains no episode manifests")
    episodes = [load_episode(d, cache_size=cache_size) for d in ep_dirs]
    chain = None
    if (root / CHAIN_NAME).exists():
        chain = load_chain(root / CHAIN_NAME)
    return DemoDataset(root=root, episodes=episodes, chain=chain)
