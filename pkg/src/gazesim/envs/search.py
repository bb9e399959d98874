"""Visual search environments: object search on annotated frames and
scene search toward feature-similar viewpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..foveation import PyramidConfig, build_pyramid
from ..gimbal import GazeState, GimbalConfig, random_init, step_gaze, teleport
from ..panorama import ViewSpec, angles_from_dir, dir_from_angles, render_view
from ..rewards import (FeatureExtractor, feature_similarity_reward,
                       truncated_distance_reward)
from .base import EnvStepResult, Observation


@dataclass(frozen=True)
class SearchConfig:
    """Episode mechanics shared by the search tasks."""

    episode_steps: int = 100
    conditioned: bool = False          # include target-feature token
    target_crop_fov: float = math.radians(30.0)
    crop_resolution: int = 32
    scene_fov_range: tuple[float, float] = (math.radians(10.0), math.radians(65.0))
    scene_el_range: float = math.radians(70.0)
    scene_reward: str = "distance"     # distance | similarity | combined

    def __post_init__(self):
        if self.episode_steps < 1:
            raise ValueError("episode_steps must be >= 1")
        if self.scene_reward not in ("distance", "similarity", "combined"):
            raise ValueError(f"unknown scene_reward {self.scene_reward!r}")


class ObjectSearchEnv:
    """Hold one annotated frame; reward centering the annotated bearing.

    The reward is the truncated angular distance with the coarsest pyramid
    fov as the cutoff. When conditioning is enabled the observation carries
    the extractor features of a crop centered on the target, otherwise a
    zero vector of the same size (the post-pretraining convention).
    """

    def __init__(self, episodes, gimbal: GimbalConfig, pyramid: PyramidConfig,
                 fx: FeatureExtractor, config: SearchConfig = SearchConfig()):
        annotated = [ep for ep in episodes if ep.annotations is not None]
        if not annotated:
            raise ValueError("object search needs episodes with annotations")
        self.episodes = annotated
        self.gimbal = gimbal
        self.pyramid_cfg = pyramid
        self.fx = fx
        self.config = config
        self.coarsest_fov = pyramid.level_fovs[-1]
        self._state: GazeState | None = None
        self._pano = None
        self._target_dir = None
        self._target_feats = None
        self._frame_index = 0
        self._steps = 0
        self._done = True

    def _observe(self) -> Observation:
        pyr = build_pyramid(self._pano, self._state, self.pyramid_cfg)
        return Observation(pyramid=pyr, gaze=self._state.direction(),
                           proprio=None, target_features=self._target_feats)

    def reset(self, rng: np.random.Generator) -> Observation:
        ep = self.episodes[int(rng.integers(len(self.episodes)))]
        self._frame_index = int(rng.integers(len(ep)))
        self._pano = ep.frame(self._frame_index)
        self._target_dir = ep.target_direction(self._frame_index)
        if self.config.conditioned:
            az, el = angles_from_dir(self._target_dir)
            crop = render_view(self._pano, ViewSpec(
                az, el, self.config.target_crop_fov,
                self.config.crop_resolution, self.pyramid_cfg.projection))
            self._target_feats = self.fx(crop)
        else:
            self._target_feats = np.zeros(self.fx.dim)
        self._state = random_init(rng)
        self._steps = 0
        self._done = False
        return self._observe()

    @property
    def gaze(self) -> GazeState:
        return self._state

    @property
    def target_direction(self) -> np.ndarray:
        return self._target_dir

    def target_angles(self) -> tuple[float, float]:
        return angles_from_dir(self._target_dir)

    def snap_gaze(self, azimuth: float, elevation: float) -> None:
        """Place the gaze directly (oracle-policy harness)."""
        self._state = teleport(self._state, azimuth, elevation, self.gimbal)

    def step(self, action: int) -> EnvStepResult:
        if self._done:
            raise RuntimeError("env is done; call reset()")
        self._state = step_gaze(self._state, action, self.gimbal)
        reward = truncated_distance_reward(self._state.direction(),
                                           self._target_dir, self.coarsest_fov)
        self._steps += 1
        self._done = self._steps >= self.config.episode_steps
        az, el = angles_from_dir(self._target_dir)
        info = {"frame_index": self._frame_index,
                "target_azimuth": az, "target_elevation": el}
        return EnvStepResult(self._observe(), reward, self._done, info)


class SceneSearchEnv:
    """Find the viewpoint matching a target crop sampled from the scene.

    Targets sample a random bearing and a fov uniform in the configured
    range; the observation carries the target crop's extractor features.
    Reward modes: truncated angular distance, feature similarity between
    the current view (rendered at the target's fov) and the target, or the
    equally weighted sum of both after mapping similarity to [0, 1].
    """

    def __init__(self, panoramas, gimbal: GimbalConfig, pyramid: PyramidConfig,
                 fx: FeatureExtractor, config: SearchConfig = SearchConfig()):
        if not panoramas:
            raise ValueError("scene search needs at least one panorama")
        self.panoramas = list(panoramas)
        self.gimbal = gimbal
        self.pyramid_cfg = pyramid
        self.fx = fx
        self.config = config
        self.coarsest_fov = pyramid.level_fovs[-1]
        self._state: GazeState | None = None
        self._pano = None
        self._target_dir = None
        self._target_fov = None
        self._target_feats = None
        self._steps = 0
        self._done = True

    def _observe(self) -> Observation:
        pyr = build_pyramid(self._pano, self._state, self.pyramid_cfg)
        return Observation(pyramid=pyr, gaze=self._state.direction(),
                           proprio=None, target_features=self._target_feats)

    def reset(self, rng: np.random.Generator) -> Observation:
        self._pano = self.panoramas[int(rng.integers(len(self.panoramas)))]
        az = float(rng.uniform(-math.pi, math.pi))
        el = float(rng.uniform(-self.config.scene_el_range,
                               self.config.scene_el_range))
        lo, hi = self.config.scene_fov_range
        self._target_fov = float(rng.uniform(lo, hi))
        self._target_dir = dir_from_angles(az, el)
        crop = render_view(self._pano, ViewSpec(
            az, el, self._target_fov, self.config.crop_resolution,
            self.pyramid_cfg.projection))
        self._target_feats = self.fx(crop)
        self._state = random_init(rng)
        self._steps = 0
        self._done = False
        return self._observe()

    @property
    def gaze(self) -> GazeState:
        return self._state

    def _reward(self) -> float:
        mode = self.config.scene_reward
        dist = truncated_distance_reward(self._state.direction(),
                                         self._target_dir, self.coarsest_fov)
        if mode == "distance":
            return dist
        view = render_view(self._pano, ViewSpec(
            self._state.azimuth, self._state.elevation, self._target_fov,
            self.config.crop_resolution, self.pyramid_cfg.projection))
        sim = feature_similarity_reward(view, self._target_feats, self.fx)
        if mode == "similarity":
            return sim
        return 0.5 * dist + 0.5 * (sim + 1.0) / 2.0

    def step(self, action: int) -> EnvStepResult:
        if self._done:
            raise RuntimeError("env is done; call reset()")
        self._state = step_gaze(self._state, action, self.gimbal)
        reward = self._reward()
        self._steps += 1
        self._done = self._steps >= self.config.episode_steps
        az, el = angles_from_dir(self._target_dir)
        info = {"target_azimuth": az, "target_elevation": el,
                "target_fov": self._target_fov}
        return EnvStepResult(self._observe(), reward, self._done, info)
