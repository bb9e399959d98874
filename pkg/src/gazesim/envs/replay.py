"""Demonstration replay environment for BC-RL co-training.

An episode replays a slice of a recorded demonstration: the frame pointer
freezes for an initial pause (giving the eye time to search), then
advances by ``frame_stride`` source frames per step. Rewards compare the
hand agent's predicted action chunk against the recorded chunk through
end-effector path distance; paused steps score zero and contribute no
cloning supervision.
"""

from __future__ import annotations

import numpy as np

from ..foveation import PyramidConfig, build_pyramid
from ..gimbal import GazeState, GimbalConfig, random_init, step_gaze, teleport
from ..kinematics import ChainDescription, denormalize_actions, normalize_actions
from ..panorama import angles_from_dir
from ..rewards import bc_reward
from .base import EnvStepResult, EpisodeSchedule, Observation
from .dataset import DemoDataset, DemoEpisode


def sample_start(episode: DemoEpisode, schedule: EpisodeSchedule,
                 rng: np.random.Generator) -> int:
    """Random start index honoring the buffer; raises if the episode is short."""
    hi = len(episode) - schedule.start_buffer
    if hi < 0:
        raise ValueError(
            f"episode {episode.name} too short: {len(episode)} frames < "
            f"buffer {schedule.start_buffer}")
    return int(rng.integers(hi + 1))


class ReplayEnv:
    """One BC-RL rollout over a randomly sampled demonstration slice."""

    def __init__(self, dataset: DemoDataset, chain: ChainDescription,
                 schedule: EpisodeSchedule, gimbal: GimbalConfig,
                 pyramid: PyramidConfig):
        eligible = [ep for ep in dataset.episodes
                    if len(ep) >= schedule.start_buffer]
        if not eligible:
            raise ValueError(
                f"no episode has the {schedule.start_buffer} frames required "
                f"by the schedule")
        if any(ep.trajectory.num_joints != chain.chain.num_joints
               for ep in eligible):
            raise ValueError("episode joint count does not match the chain")
        self.episodes = eligible
        self.chain = chain
        self.schedule = schedule
        self.gimbal = gimbal
        self.pyramid_cfg = pyramid
        self._episode: DemoEpisode | None = None
        self._start = 0
        self._steps = 0
        self._state: GazeState | None = None
        self._done = True

    # -- episode mechanics --------------------------------------------------

    @property
    def frame_index(self) -> int:
        return self._start + self.schedule.frame_offset(self._steps)

    @property
    def in_pause(self) -> bool:
        """True while the frame pointer is still frozen at the start index."""
        return self._steps <= self.schedule.pause_steps

    @property
    def gaze(self) -> GazeState:
        return self._state

    @property
    def episode(self) -> DemoEpisode:
        return self._episode

    def observe(self) -> Observation:
        """Observation at the current (frame, gaze); pure given env state."""
        frame = self._episode.frame(self.frame_index)
        pyr = build_pyramid(frame, self._state, self.pyramid_cfg)
        proprio = normalize_actions(
            self._episode.trajectory.positions[self.frame_index],
            self._episode.joint_limits)
        return Observation(pyramid=pyr, gaze=self._state.direction(),
                           proprio=proprio, target_features=None)

    def snap_gaze(self, azimuth: float, elevation: float) -> None:
        """Place the gaze directly (oracle-eye harness); zeroes velocity."""
        self._state = teleport(self._state, azimuth, elevation, self.gimbal)

    def reset(self, rng: np.random.Generator) -> Observation:
        self._episode = self.episodes[int(rng.integers(len(self.episodes)))]
        self._start = sample_start(self._episode, self.schedule, rng)
        self._state = random_init(rng)
        self._steps = 0
        self._done = False
        return self.observe()

    def gt_chunk(self) -> np.ndarray:
        """Normalized ground-truth chunk starting at the current frame, (A, J)."""
        i = self.frame_index
        chunk = self._episode.trajectory.positions[i:i + self.schedule.chunk_size]
        return normalize_actions(chunk, self._episode.joint_limits)

    def step(self, eye_action: int, bc_prediction=None) -> EnvStepResult:
        """Advance one step.

        ``bc_prediction`` is the hand agent's normalized chunk (A, J)
        computed from the observation returned by the previous step/reset;
        it is scored against the recorded chunk starting at that
        observation's frame. Paused steps score zero, as does passing None
        (eye-only rollouts).
        """
        if self._done:
            raise RuntimeError("env is done; call reset()")
        obs_frame = self.frame_index  # frame the caller's prediction saw
        self._state = step_gaze(self._state, eye_action, self.gimbal)
        self._steps += 1
        scored = self._steps > self.schedule.pause_steps
        reward = 0.0
        if scored and bc_prediction is not None:
            limits = self._episode.joint_limits
            gt = self._episode.trajectory.positions[
                obs_frame:obs_frame + self.schedule.chunk_size]
            pred = denormalize_actions(np.asarray(bc_prediction, dtype=float),
                                       limits)
            if pred.shape != gt.shape:
                raise ValueError(
                    f"prediction shape {pred.shape} != ground truth {gt.shape}")
            reward = bc_reward(self.chain.chain, pred, gt)
        self._done = self._steps >= self.schedule.total_steps
        info = {"frame_index": self.frame_index, "scored": scored,
                "start_index": self._start}
        if self._episode.annotations is not None:
            az, el = angles_from_dir(
                self._episode.target_direction(self.frame_index))
            info["target_azimuth"] = az
            info["target_elevation"] = el
        return EnvStepResult(self.observe(), reward, self._done, info)
