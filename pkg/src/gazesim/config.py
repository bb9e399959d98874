"""Run configuration: one JSON file fully describing a reproducible run.

Angular quantities use degrees in the file (fields suffixed ``_deg``) and
radians everywhere in code. Unknown keys are rejected so config typos fail
loudly at startup.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .envs.base import EpisodeSchedule
from .envs.search import SearchConfig
from .envs.synthetic import SynthSpec
from .foveation import PyramidConfig
from .gimbal import GimbalConfig
from .learner.rl import PpoConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LearnerConfig:
    """Network shapes and update batching for the desk-scale policies."""

    eye_hidden: tuple[int, ...] = (64, 64)
    bc_hidden: tuple[int, ...] = (128, 128)
    activation: str = "tanh"
    weight_decay: float = 0.01
    bc_epochs: int = 4
    bc_minibatch: int = 256
    extractor_grid: int = 8


@dataclass(frozen=True)
class EvalConfig:
    episodes: int = 100
    success_angle: float = math.radians(5.0)
    success_within: int = 90
    scene_crop_fov: float = math.radians(40.0)
    scene_steps_per_target: int = 20
    scene_grid: tuple[int, int] = (4, 6)
    scene_crop_resolution: int = 64
    scene_images: int = 20


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    dataset: str | None = None
    eval_dataset: str | None = None
    chain: str | None = None            # defaults to the dataset's chain.json
    budget_steps: int = 200_000
    num_envs: int = 16
    workers: int = 1
    task: str = "object"                # object | scene (search commands)
    checkpoint_every: int = 20
    gimbal: GimbalConfig = field(default_factory=GimbalConfig)
    pyramid: PyramidConfig = field(default_factory=PyramidConfig)
    schedule: EpisodeSchedule = field(default_factory=EpisodeSchedule)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    synth: SynthSpec = field(default_factory=SynthSpec)

    def __post_init__(self):
        if self.task not in ("object", "scene"):
            raise ConfigError(f"task must be 'object' or 'scene', got {self.task!r}")
        if self.num_envs < 1 or self.workers < 1 or self.budget_steps < 1:
            raise ConfigError("num_envs, workers and budget_steps must be >= 1")


_DEG = object()  # marker: degrees in JSON, radians in the dataclass
_DEG_PAIR = object()
_TUPLE = object()

# section -> {json_key: (dataclass_field, conversion)}
_SECTIONS: dict[str, tuple[type, dict]] = {
    "gimbal": (GimbalConfig, {
        "step_size_deg": ("step_size", _DEG),
        "elev_limit_deg": ("elev_limit", _DEG),
        "smoothing_alpha": ("smoothing_alpha", None),
        "diagonal_normalized": ("diagonal_normalized", None),
    }),
    "pyramid": (PyramidConfig, {
        "num_levels": ("num_levels", None),
        "resolution": ("resolution", None),
        "fov0_deg": ("fov0", _DEG),
        "patch_grid": ("patch_grid", None),
        "projection": ("projection", None),
    }),
    "schedule": (EpisodeSchedule, {
        "total_steps": ("total_steps", None),
        "pause_steps": ("pause_steps", None),
        "frame_stride": ("frame_stride", None),
        "chunk_size": ("chunk_size", None),
    }),
    "ppo": (PpoConfig, {
        "clip_ratio": ("clip_ratio", None),
        "discount": ("discount", None),
        "gae_lambda": ("gae_lambda", None),
        "entropy_coef": ("entropy_coef", None),
        "value_coef": ("value_coef", None),
        "epochs": ("epochs", None),
        "minibatch": ("minibatch", None),
        "eye_lr0": ("eye_lr0", None),
        "bc_lr0": ("bc_lr0", None),
        "reward_scale": ("reward_scale", None),
    }),
    "search": (SearchConfig, {
        "episode_steps": ("episode_steps", None),
        "conditioned": ("conditioned", None),
        "target_crop_fov_deg": ("target_crop_fov", _DEG),
        "crop_resolution": ("crop_resolution", None),
        "scene_fov_range_deg": ("scene_fov_range", _DEG_PAIR),
        "scene_el_range_deg": ("scene_el_range", _DEG),
        "scene_reward": ("scene_reward", None),
    }),
    "learner": (LearnerConfig, {
        "eye_hidden": ("eye_hidden", _TUPLE),
        "bc_hidden": ("bc_hidden", _TUPLE),
        "activation": ("activation", None),
        "weight_decay": ("weight_decay", None),
        "bc_epochs": ("bc_epochs", None),
        "bc_minibatch": ("bc_minibatch", None),
        "extractor_grid": ("extractor_grid", None),
    }),
    "eval": (EvalConfig, {
        "episodes": ("episodes", None),
        "success_angle_deg": ("success_angle", _DEG),
        "success_within": ("success_within", None),
        "scene_crop_fov_deg": ("scene_crop_fov", _DEG),
        "scene_steps_per_target": ("scene_steps_per_target", None),
        "scene_grid": ("scene_grid", _TUPLE),
        "scene_crop_resolution": ("scene_crop_resolution", None),
        "scene_images": ("scene_images", None),
    }),
    "synth": (SynthSpec, {
        "episodes": ("episodes", None),
        "pano_width": ("pano_width", None),
        "frames": ("frames", None),
        "fps": ("fps", None),
        "disk_radius_deg": ("disk_radius", _DEG),
        "target_az_range_deg": ("target_az_range", _DEG),
        "target_el_range_deg": ("target_el_range", _DEG),
        "texture_cells": ("texture_cells", _TUPLE),
        "disk_color": ("disk_color", _TUPLE),
    }),
}

_TOP_KEYS = ("seed", "dataset", "eval_dataset", "chain", "budget_steps",
             "num_envs", "workers", "task", "checkpoint_every")


def _convert_in(value, conv):
    if conv is _DEG:
        return math.radians(float(value))
    if conv is _DEG_PAIR:
        return tuple(math.radians(float(v)) for v in value)
    if conv is _TUPLE:
        return tuple(value)
    return value


def _convert_out(value, conv):
    if conv is _DEG:
        return math.degrees(value)
    if conv is _DEG_PAIR:
        return [math.degrees(v) for v in value]
    if conv is _TUPLE:
        return list(value)
    return value


def config_from_dict(raw: dict) -> RunConfig:
    raw = dict(raw)
    kwargs = {}
    for key in _TOP_KEYS:
        if key in raw:
            kwargs[key] = raw.pop(key)
    for section, (cls, fields_map) in _SECTIONS.items():
        if section not in raw:
            continue
        sub_raw = raw.pop(section)
        sub_kwargs = {}
        for json_key, value in sub_raw.items():
            if json_key not in fields_map:
                raise ConfigError(f"unknown key {section}.{json_key!r}")
            fname, conv = fields_map[json_key]
            sub_kwargs[fname] = _convert_in(value, conv)
        try:
            kwargs[section] = cls(**sub_kwargs)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad {section} config: {e}")
    if raw:
        raise ConfigError(f"unknown config keys: {sorted(raw)}")
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e))


def config_to_dict(cfg: RunConfig) -> dict:
    out: dict = {key: getattr(cfg, key) for key in _TOP_KEYS}
    for section, (cls, fields_map) in _SECTIONS.items():
        sub = getattr(cfg, section)
        out[section] = {
            json_key: _convert_out(getattr(sub, fname), conv)
            for json_key, (fname, conv) in fields_map.items()
        }
    return out


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path) as f:
            raw = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}")
    return config_from_dict(raw)


def save_config(path, cfg: RunConfig) -> None:
    with open(Path(path), "w") as f:
        json.dump(config_to_dict(cfg), f, indent=2, sort_keys=True)
        f.write("\n")


def replace_config(cfg: RunConfig, **kwargs) -> RunConfig:
    return dataclasses.replace(cfg, **kwargs)
