"""Training loops: PPO search training and the BC-RL co-training iteration.

One iteration resets every parallel environment, rolls complete episodes,
then applies one policy optimization pass (and, for co-training, one
cloning pass) on the collected data. Keeping iterations episode-aligned
makes checkpoint resume bit-exact: all mutable state is (params, optimizer
moments, rng).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..envs.replay import ReplayEnv
from ..gimbal import STAY_ACTION
from ..panorama import angles_from_dir
from .bc import bc_update
from .encode import ObservationEncoder
from .net import MlpSpec, forward, log_softmax, sample_categorical
from .optim import AdamWConfig, OptimState
from .rl import PpoConfig, gae, ppo_update

EYE_MODES = ("policy", "oracle", "random")


@dataclass
class SearchTrainState:
    params: dict
    spec: MlpSpec
    opt: OptimState
    opt_cfg: AdamWConfig
    ppo: PpoConfig
    rng: np.random.Generator
    env_steps: int = 0
    iteration: int = 0


def _sample_actions(params, spec, feats, rng):
    outs, _ = forward(params, spec, feats)
    logits, values = outs["policy"], outs["value"][:, 0]
    actions = sample_categorical(logits, rng)
    logp = log_softmax(logits)[np.arange(len(actions)), actions]
    return actions, logp, values


def search_iteration(state: SearchTrainState, envs, encoder: ObservationEncoder) -> dict:
    """Roll one fresh episode in every env, then one PPO pass."""
    n_envs = len(envs)
    horizon = envs[0].config.episode_steps
    obs = [env.reset(state.rng) for env in envs]
    feats = encoder.encode_batch(obs)

    obs_buf = np.empty((horizon, n_envs, encoder.dim))
    act_buf = np.empty((horizon, n_envs), dtype=int)
    logp_buf = np.empty((horizon, n_envs))
    val_buf = np.empty((horizon, n_envs))
    rew_buf = np.empty((horizon, n_envs))
    done_buf = np.zeros((horizon, n_envs), dtype=bool)

    for t in range(horizon):
        actions, logp, values = _sample_actions(state.params, state.spec,
                                                feats, state.rng)
        obs_buf[t] = feats
        act_buf[t] = actions
        logp_buf[t] = logp
        val_buf[t] = values
        for i, env in enumerate(envs):
            res = env.step(int(actions[i]))
            rew_buf[t, i] = res.reward
            done_buf[t, i] = res.done
            obs[i] = res.observation
        if t + 1 < horizon:
            feats = encoder.encode_batch(obs)

    adv, ret = gae(rew_buf * state.ppo.reward_scale, val_buf, done_buf,
                   state.ppo.discount, state.ppo.gae_lambda)
    batch = {
        "obs": obs_buf.reshape(-1, encoder.dim),
        "actions": act_buf.reshape(-1),
        "logp_old": logp_buf.reshape(-1),
        "advantages": adv.reshape(-1),
        "returns": ret.reshape(-1),
    }
    stats = ppo_update(state.params, state.spec, batch, state.ppo,
                       state.opt, state.opt_cfg, state.rng)
    state.env_steps += horizon * n_envs
    state.iteration += 1
    return {
        "iteration": state.iteration,
        "step": state.env_steps,
        "reward_mean": float(rew_buf.mean()),
        "reward_final": float(rew_buf[-1].mean()),
        **stats,
    }


@dataclass
class CoTrainState:
    eye_params: dict
    eye_spec: MlpSpec
    eye_opt: OptimState
    eye_opt_cfg: AdamWConfig
    bc_params: dict
    bc_spec: MlpSpec
    bc_opt: OptimState
    bc_opt_cfg: AdamWConfig
    ppo: PpoConfig
    rng: np.random.Generator
    env_steps: int = 0
    iteration: int = 0


def encode_shared(obs, fx) -> np.ndarray:
    """Pyramid features + gaze vector (shared by the eye and hand inputs)."""
    parts = [fx(level) for level in obs.pyramid.levels]
    parts.append(np.asarray(obs.gaze, dtype=float))
    return np.concatenate(parts)


def _snap_to_target(env: ReplayEnv) -> None:
    az, el = angles_from_dir(env.episode.target_direction(env.frame_index))
    env.snap_gaze(az, el)


def bcrl_iteration(state: CoTrainState, envs, fx, eye_mode: str = "policy",
                   bc_epochs: int = 4, bc_minibatch: int = 256) -> dict:
    """One co-training round.

    Rolls every replay env with the chosen eye behavior, querying the hand
    net each scorable step: its chunk prediction (on the current
    observation) is scored as the eye reward and the (input, ground-truth
    chunk) pair recorded. Afterwards one PPO pass updates the eye (policy
    mode only) and one cloning pass updates the hand, on separate
    optimizers.
    """
    if eye_mode not in EYE_MODES:
        raise ValueError(f"eye_mode must be one of {EYE_MODES}")
    n_envs = len(envs)
    schedule = envs[0].schedule
    horizon = schedule.total_steps
    pause = schedule.pause_steps

    obs = [env.reset(state.rng) for env in envs]
    if eye_mode == "oracle":
        for env in envs:
            _snap_to_target(env)
        obs = [env.observe() for env in envs]

    shared = np.stack([encode_shared(o, fx) for o in obs])
    proprio = np.stack([o.proprio for o in obs])
    eye_dim = shared.shape[1]

    eye_obs = np.empty((horizon, n_envs, eye_dim))
    act_buf = np.empty((horizon, n_envs), dtype=int)
    logp_buf = np.empty((horizon, n_envs))
    val_buf = np.empty((horizon, n_envs))
    rew_buf = np.empty((horizon, n_envs))
    done_buf = np.zeros((horizon, n_envs), dtype=bool)
    bc_inputs, bc_targets = [], []

    for t in range(horizon):
        scored = (t + 1) > pause  # the upcoming step is past the pause
        preds = None
        if scored:
            bc_feats = np.concatenate([shared, proprio], axis=1)
            outs, _ = forward(state.bc_params, state.bc_spec, bc_feats)
            preds = outs["chunk"]
            bc_inputs.append(bc_feats)
            bc_targets.append(np.stack([env.gt_chunk().reshape(-1)
                                        for env in envs]))

        if eye_mode == "policy":
            actions, logp, values = _sample_actions(
                state.eye_params, state.eye_spec, shared, state.rng)
        elif eye_mode == "random":
            actions = state.rng.integers(0, 9, size=n_envs)
            logp = np.zeros(n_envs)
            values = np.zeros(n_envs)
        else:  # oracle: hold the target; stay action keeps gaze in place
            actions = np.full(n_envs, STAY_ACTION)
            logp = np.zeros(n_envs)
            values = np.zeros(n_envs)

        eye_obs[t] = shared
        act_buf[t] = actions
        logp_buf[t] = logp
        val_buf[t] = values
        for i, env in enumerate(envs):
            chunk = None
            if preds is not None:
                chunk = preds[i].reshape(schedule.chunk_size, -1)
            res = env.step(int(actions[i]), chunk)
            rew_buf[t, i] = res.reward
            done_buf[t, i] = res.done
            obs[i] = res.observation
        if eye_mode == "oracle":
            for env in envs:
                _snap_to_target(env)
            obs = [env.observe() for env in envs]
        if t + 1 < horizon:
            shared = np.stack([encode_shared(o, fx) for o in obs])
            proprio = np.stack([o.proprio for o in obs])

    metrics = {"iteration": state.iteration + 1}
    if eye_mode == "policy":
        adv, ret = gae(rew_buf * state.ppo.reward_scale, val_buf, done_buf,
                       state.ppo.discount, state.ppo.gae_lambda)
        batch = {
            "obs": eye_obs.reshape(-1, eye_dim),
            "actions": act_buf.reshape(-1),
            "logp_old": logp_buf.reshape(-1),
            "advantages": adv.reshape(-1),
            "returns": ret.reshape(-1),
        }
        metrics.update(ppo_update(state.eye_params, state.eye_spec, batch,
                                  state.ppo, state.eye_opt, state.eye_opt_cfg,
                                  state.rng))

    bc_loss = bc_update(state.bc_params, state.bc_spec,
                        np.concatenate(bc_inputs), np.concatenate(bc_targets),
                        state.bc_opt, state.bc_opt_cfg,
                        epochs=bc_epochs, minibatch=bc_minibatch,
                        rng=state.rng)
    state.env_steps += horizon * n_envs
    state.iteration += 1
    scored_rewards = rew_buf[pause:]
    metrics.update({
        "iteration": state.iteration,
        "step": state.env_steps,
        "bc_loss": float(bc_loss),
        "reward_mean": float(scored_rewards.mean()),
        "reward_final": float(rew_buf[-1].mean()),
    })
    return metrics
