"""Clipped-surrogate policy optimization with generalized advantage estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .net import MlpSpec, backward, forward, log_softmax
from .optim import AdamWConfig, OptimState, adamw_step


@dataclass(frozen=True)
class PpoConfig:
    clip_ratio: float = 0.2
    discount: float = 0.99
    gae_lambda: float = 0.95
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    epochs: int = 4
    minibatch: int = 256
    eye_lr0: float = 5.0e-4
    bc_lr0: float = 1.0e-3
    # Rewards are multiplied by this before GAE/value fitting so returns sit
    # at O(1), where the value head can track them; (1 - discount) is the
    # natural choice for dense per-step rewards.
    reward_scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.clip_ratio < 1.0):
            raise ValueError("clip_ratio must lie in (0, 1)")
        if not (0.0 < self.discount <= 1.0 and 0.0 <= self.gae_lambda <= 1.0):
            raise ValueError("discount in (0, 1], gae_lambda in [0, 1]")
        if self.reward_scale <= 0.0:
            raise ValueError("reward_scale must be > 0")


class NanLossError(RuntimeError):
    """Raised when an update produces a non-finite loss; carries diagnostics."""


def gae(rewards, values, dones, discount: float, lam: float,
        normalize: bool = False):
    """Generalized advantage estimation over time-major arrays.

    ``rewards``, ``values`` and ``dones`` share shape (T,) or (T, E); the
    value past the final step is taken as zero (episodes here end on
    ``done``). Returns (advantages, returns); pass ``normalize=True`` for
    the batch-standardized advantages used by the policy update.
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=bool)
    if not (rewards.shape == values.shape == dones.shape):
        raise ValueError("rewards, values and dones must share a shape")
    advantages = np.zeros_like(rewards)
    running = np.zeros(rewards.shape[1:])
    next_value = np.zeros(rewards.shape[1:])
    for t in range(rewards.shape[0] - 1, -1, -1):
        live = ~dones[t]
        delta = rewards[t] + discount * next_value * live - values[t]
        running = delta + discount * lam * live * running
        advantages[t] = running
        next_value = values[t]
    returns = advantages + values
    if normalize:
        std = advantages.std()
        advantages = (advantages - advantages.mean()) / (std + 1.0e-8)
    return advantages, returns


def entropy_of_logits(logits: np.ndarray) -> np.ndarray:
    logp = log_softmax(logits)
    return -(np.exp(logp) * logp).sum(axis=-1)


def ppo_update(params: dict, spec: MlpSpec, batch: dict, cfg: PpoConfig,
               opt_state: OptimState, opt_cfg: AdamWConfig,
               rng: np.random.Generator) -> dict:
    """One PPO optimization pass (epochs x minibatches) over a rollout batch.

    ``batch`` holds flat arrays: obs (N, D), actions (N,), logp_old (N,),
    advantages (N, raw), returns (N,). Advantages are standardized here.
    Loss = clipped surrogate + value_coef * value MSE - entropy_coef * entropy.
    """
    obs = np.asarray(batch["obs"], dtype=float)
    actions = np.asarray(batch["actions"], dtype=int)
    logp_old = np.asarray(batch["logp_old"], dtype=float)
    adv = np.asarray(batch["advantages"], dtype=float)
    returns = np.asarray(batch["returns"], dtype=float)
    n = obs.shape[0]
    adv = (adv - adv.mean()) / (adv.std() + 1.0e-8)

    eps = cfg.clip_ratio
    stats = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0,
             "clip_fraction": 0.0, "approx_kl": 0.0, "updates": 0}
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, cfg.minibatch):
            idx = order[lo:lo + cfg.minibatch]
            x, a = obs[idx], actions[idx]
            adv_b, ret_b, logp_old_b = adv[idx], returns[idx], logp_old[idx]
            b = len(idx)

            outs, cache = forward(params, spec, x)
            logits, value = outs["policy"], outs["value"][:, 0]
            logp_all = log_softmax(logits)
            p = np.exp(logp_all)
            logp = logp_all[np.arange(b), a]
            ratio = np.exp(logp - logp_old_b)
            s1 = ratio * adv_b
            s2 = np.clip(ratio, 1.0 - eps, 1.0 + eps) * adv_b
            policy_loss = -np.minimum(s1, s2).mean()
            value_err = value - ret_b
            value_loss = (value_err ** 2).mean()
            ent = -(p * logp_all).sum(axis=-1)
            loss = (policy_loss + cfg.value_coef * value_loss
                    - cfg.entropy_coef * ent.mean())
            if not np.isfinite(loss):
                raise NanLossError(
                    f"non-finite PPO loss (policy={policy_loss!r}, "
                    f"value={value_loss!r}, entropy={ent.mean()!r}, "
                    f"ratio range=({ratio.min()!r}, {ratio.max()!r}))")

            # d(loss)/d(logits): surrogate flows only through the unclipped
            # branch; entropy gradient is -p * (logp + H) per logit.
            d_logp = np.where(s1 <= s2, -ratio * adv_b, 0.0) / b
            onehot = np.zeros_like(logits)
            onehot[np.arange(b), a] = 1.0
            d_logits = d_logp[:, None] * (onehot - p)
            d_logits += cfg.entropy_coef / b * p * (logp_all + ent[:, None])
            d_value = cfg.value_coef * 2.0 * value_err[:, None] / b

            grads = backward(params, spec, cache,
                             {"policy": d_logits, "value": d_value})
            adamw_step(params, grads, opt_state, opt_cfg)

            stats["policy_loss"] += float(policy_loss)
            stats["value_loss"] += float(value_loss)
            stats["entropy"] += float(ent.mean())
            stats["clip_fraction"] += float((np.abs(ratio - 1.0) > eps).mean())
            stats["approx_kl"] += float((logp_old_b - logp).mean())
            stats["updates"] += 1

    k = max(stats["updates"], 1)
    return {key: (val / k if key != "updates" else val)
            for key, val in stats.items()}
