"""Flattening observations into policy input vectors.

Desk-scale stand-in for the transformer's token pipeline: per-level
extractor features of the pyramid, concatenated with the gaze direction
and, where configured, the proprioceptive vector and the target token.
"""

from __future__ import annotations

import numpy as np

from ..envs.base import Observation
from ..rewards import FeatureExtractor


class ObservationEncoder:
    def __init__(self, fx: FeatureExtractor, num_levels: int,
                 proprio_dim: int = 0, include_target: bool = False):
        self.fx = fx
        self.num_levels = num_levels
        self.proprio_dim = proprio_dim
        self.include_target = include_target
        self.dim = (num_levels * fx.dim + 3 + proprio_dim
                    + (fx.dim if include_target else 0))

    def encode(self, obs: Observation) -> np.ndarray:
        levels = obs.pyramid.levels
        if len(levels) != self.num_levels:
            raise ValueError(
                f"pyramid has {len(levels)} levels, encoder expects "
                f"{self.num_levels}")
        parts = [self.fx(level) for level in levels]
        parts.append(np.asarray(obs.gaze, dtype=float))
        if self.proprio_dim:
            proprio = obs.proprio
            if proprio is None:
                proprio = np.zeros(self.proprio_dim)
            parts.append(np.asarray(proprio, dtype=float))
        if self.include_target:
            target = obs.target_features
            if target is None:
                target = np.zeros(self.fx.dim)
            parts.append(np.asarray(target, dtype=float))
        return np.concatenate(parts)

    def encode_batch(self, observations) -> np.ndarray:
        return np.stack([self.encode(o) for o in observations])
