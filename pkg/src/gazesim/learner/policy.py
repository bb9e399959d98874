"""Eye policy wrappers sharing one interface for training and evaluation."""

from __future__ import annotations

import numpy as np

from ..envs.base import Observation
from ..gimbal import NUM_ACTIONS
from .encode import ObservationEncoder
from .net import MlpSpec, forward, log_softmax, sample_categorical


class MlpEyePolicy:
    """Categorical 9-way policy with a value head, acting on encoded features."""

    def __init__(self, params: dict, spec: MlpSpec, encoder: ObservationEncoder):
        self.params = params
        self.spec = spec
        self.encoder = encoder

    def logits_values(self, features: np.ndarray):
        outs, _ = forward(self.params, self.spec, features)
        return outs["policy"], outs["value"][..., 0]

    def act_batch(self, features: np.ndarray, rng: np.random.Generator):
        """Sample actions for a feature batch; returns (actions, logp, value)."""
        logits, values = self.logits_values(features)
        actions = sample_categorical(logits, rng)
        logp = log_softmax(logits)[np.arange(len(actions)), actions]
        return actions, logp, values

    def act_obs(self, obs: Observation, rng: np.random.Generator) -> int:
        feats = self.encoder.encode(obs)
        actions, _, _ = self.act_batch(feats[None, :], rng)
        return int(actions[0])


class RandomEyePolicy:
    """Uniform over the 9 actions; the search baseline."""

    def act_obs(self, obs: Observation, rng: np.random.Generator) -> int:
        return int(rng.integers(NUM_ACTIONS))

    def act_batch(self, features: np.ndarray, rng: np.random.Generator):
        n = np.atleast_2d(features).shape[0]
        actions = rng.integers(NUM_ACTIONS, size=n)
        logp = np.full(n, -np.log(NUM_ACTIONS))
        return actions, logp, np.zeros(n)


class OracleEyePolicy:
    """Marker policy: harnesses snap the gaze straight onto the target."""

    teleport_to_target = True

    def act_obs(self, obs: Observation, rng: np.random.Generator) -> int:
        raise RuntimeError("oracle policy teleports; it does not emit actions")
