"""Synthetic panorama datasets: a colored disk target on a textured sphere.

Desk-scale substitute for teleoperated capture. Each episode is a static
scene (one distinct frame referenced by every timestep) containing a
saturated disk at a random bearing, with a ground-truth trajectory whose
first joint ramps linearly from rest to the disk azimuth. The ramp's
endpoint cannot be inferred from proprioception alone (the remaining
joints are constant), so accurate chunk prediction requires seeing the
disk.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..kinematics import ChainDescription, DHChain, DHJoint, save_chain
from ..panorama import EquirectPanorama, dir_from_angles, pixel_directions, save_image
from .dataset import CHAIN_NAME, DemoDataset, load_dataset


@dataclass(frozen=True)
class SynthSpec:
    """Knobs for the synthetic generator."""

    episodes: int = 20
    pano_width: int = 256
    frames: int = 300
    fps: float = 30.0
    disk_radius: float = math.radians(10.0)
    target_az_range: float = math.radians(75.0)
    target_el_range: float = math.radians(20.0)
    texture_cells: tuple[int, int] = (12, 6)   # (cols, rows) of the color field
    disk_color: tuple[float, float, float] = (1.0, 0.08, 0.08)

    def __post_init__(self):
        if self.pano_width % 2 != 0 or self.pano_width < 4:
            raise ValueError("pano_width must be an even integer >= 4")
        if self.episodes < 1 or self.frames < 2:
            raise ValueError("need at least 1 episode and 2 frames")
        if not (0.0 < self.target_az_range <= math.pi):
            raise ValueError("target_az_range must lie in (0, pi]")
        if not (0.0 < self.target_el_range <= math.pi / 2):
            raise ValueError("target_el_range must lie in (0, pi/2]")


def synthetic_chain() -> ChainDescription:
    """Planar 2R arm whose first joint angle equals the end-effector bearing."""
    chain = DHChain((DHJoint(a=0.45, d=0.25, alpha=0.0),
                     DHJoint(a=0.35, d=0.0, alpha=0.0)))
    limits = np.array([[-math.pi / 2, math.pi / 2],
                       [-math.pi / 2, math.pi / 2]])
    return ChainDescription(name="planar2", chain=chain, joint_limits=limits)


def _smooth_background(width: int, height: int, cells: tuple[int, int],
                       rng: np.random.Generator) -> np.ndarray:
    """Low-frequency color field: a coarse random grid upsampled bilinearly
    with horizontal wraparound (so the azimuth seam stays continuous)."""
    cw, ch = cells
    coarse = rng.uniform(0.15, 0.75, size=(ch, cw, 3))
    x = (np.arange(width) + 0.5) / width * cw - 0.5
    y = (np.arange(height) + 0.5) / height * ch - 0.5
    x0 = np.floor(x).astype(int)
    y0 = np.floor(y).astype(int)
    fx = (x - x0)[None, :, None]
    fy = (y - y0)[:, None, None]
    x0w, x1w = np.mod(x0, cw), np.mod(x0 + 1, cw)
    y0c, y1c = np.clip(y0, 0, ch - 1), np.clip(y0 + 1, 0, ch - 1)
    top = coarse[np.ix_(y0c, x0w)] * (1 - fx) + coarse[np.ix_(y0c, x1w)] * fx
    bot = coarse[np.ix_(y1c, x0w)] * (1 - fx) + coarse[np.ix_(y1c, x1w)] * fx
    return top * (1 - fy) + bot * fy


def synthesize_panorama(spec: SynthSpec, target_az: float, target_el: float,
                        rng: np.random.Generator) -> EquirectPanorama:
    """Textured panorama with the target disk painted at the given bearing."""
    w = spec.pano_width
    h = w // 2
    img = _smooth_background(w, h, spec.texture_cells, rng)
    dirs = pixel_directions(w, h)
    target = dir_from_angles(target_az, target_el)
    mask = dirs @ target > math.cos(spec.disk_radius)
    img[mask] = spec.disk_color
    return EquirectPanorama(img)


def generate_synthetic_dataset(spec: SynthSpec, rng: np.random.Generator,
                               out_dir) -> DemoDataset:
    """Write a dataset directory and return it loaded.

    Per episode: one frame image referenced by all timesteps, a linear
    first-joint ramp ending exactly at the target azimuth, a constant
    second joint, a constant gripper channel, and per-frame bearing
    annotations. The dataset root gets the planar-2R chain description.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    desc = synthetic_chain()
    save_chain(out_dir / CHAIN_NAME, desc)

    for idx in range(spec.episodes):
        name = f"episode_{idx:04d}"
        ep_dir = out_dir / name
        (ep_dir / "frames").mkdir(parents=True, exist_ok=True)

        target_az = float(rng.uniform(-spec.target_az_range, spec.target_az_range))
        target_el = float(rng.uniform(-spec.target_el_range, spec.target_el_range))
        pano = synthesize_panorama(spec, target_az, target_el, rng)
        frame_rel = "frames/000000.png"
        save_image(ep_dir / frame_rel, pano.pixels)

        f = spec.frames
        t = np.arange(f) / spec.fps
        q1 = np.linspace(0.0, target_az, f)
        q2 = np.full(f, float(rng.uniform(-0.5, 0.5)))
        gripper = np.ones(f)
        with open(ep_dir / "trajectory.txt", "w") as fh:
            fh.write("# t q_shoulder q_elbow gripper\n")
            for i in range(f):
                fh.write(f"{float(t[i])!r} {float(q1[i])!r} "
                         f"{float(q2[i])!r} {float(gripper[i])!r}\n")
        with open(ep_dir / "annotations.txt", "w") as fh:
            fh.write("# t azimuth elevation visible\n")
            for i in range(f):
                fh.write(f"{float(t[i])!r} {target_az!r} {target_el!r} 1\n")

        manifest = {
            "name": name,
            "fps": spec.fps,
            "joint_names": ["shoulder", "elbow"],
            "joint_limits": [[-math.pi / 2, math.pi / 2],
                             [-math.pi / 2, math.pi / 2]],
            "frames": [frame_rel] * f,
            "trajectory": "trajectory.txt",
            "annotations": "annotations.txt",
            "target": {"azimuth": target_az, "elevation": target_el,
                       "disk_radius": spec.disk_radius},
        }
        with open(ep_dir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    return load_dataset(out_dir)
