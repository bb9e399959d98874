"""Shared environment types: observations, step results, episode schedules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..foveation import ObservationPyramid


@dataclass(frozen=True)
class EpisodeSchedule:
    """Replay rollout timing.

    total_steps: env steps per episode (130 = 30 paused + 100 live).
    pause_steps: initial steps with the frame frozen and no action scoring.
    frame_stride: source frames consumed per live step (2 = double speed).
    chunk_size: action-chunk horizon in source frames.
    """

    total_steps: int = 130
    pause_steps: int = 30
    frame_stride: int = 2
    chunk_size: int = 30

    def __post_init__(self):
        if not (0 <= self.pause_steps < self.total_steps):
            raise ValueError("need 0 <= pause_steps < total_steps")
        if self.frame_stride < 1:
            raise ValueError("frame_stride must be >= 1")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")

    @property
    def start_buffer(self) -> int:
        """Frames an episode must have beyond the sampled start index."""
        return self.total_steps * self.frame_stride

    def frame_offset(self, steps_done: int) -> int:
        """Frame-pointer offset from the start index after N completed steps."""
        return max(0, steps_done - self.pause_steps) * self.frame_stride


@dataclass(frozen=True)
class Observation:
    """What the agent sees at one step."""

    pyramid: ObservationPyramid
    gaze: np.ndarray                        # unit 3-vector
    proprio: np.ndarray | None = None       # normalized joint positions
    target_features: np.ndarray | None = None


@dataclass(frozen=True)
class EnvStepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.reward):
            raise ValueError(f"non-finite reward {self.reward!r}")
