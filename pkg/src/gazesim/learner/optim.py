"""AdamW with decoupled weight decay and a cosine learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamWConfig:
    """beta2 runs at 0.95; the schedule decays lr0 to lr0*final_lr_frac."""

    lr0: float
    total_steps: int
    beta1: float = 0.9
    beta2: float = 0.95
    eps: float = 1.0e-8
    weight_decay: float = 0.01
    final_lr_frac: float = 0.1

    def __post_init__(self):
        if self.lr0 <= 0 or self.total_steps < 1:
            raise ValueError("need lr0 > 0 and total_steps >= 1")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")


def lr_at(cfg: AdamWConfig, step: int) -> float:
    """Cosine decay; exactly lr0*final_lr_frac at and beyond total_steps."""
    t = min(max(step, 0), cfg.total_steps) / cfg.total_steps
    lo = cfg.lr0 * cfg.final_lr_frac
    return lo + (cfg.lr0 - lo) * 0.5 * (1.0 + math.cos(math.pi * t))


class OptimState:
    """First/second moment accumulators, one slot per parameter tensor."""

    def __init__(self, params: dict):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.step = 0

    def state_dict(self) -> dict:
        return {"m": self.m, "v": self.v, "step": self.step}

    @staticmethod
    def from_state(state: dict) -> "OptimState":
        out = OptimState.__new__(OptimState)
        out.m = {k: np.asarray(v, dtype=float) for k, v in state["m"].items()}
        out.v = {k: np.asarray(v, dtype=float) for k, v in state["v"].items()}
        out.step = int(state["step"])
        return out


def adamw_step(params: dict, grads: dict, state: OptimState,
               cfg: AdamWConfig) -> float:
    """One in-place update over every parameter with a gradient; returns lr."""
    lr = lr_at(cfg, state.step)
    state.step += 1
    t = state.step
    b1, b2 = cfg.beta1, cfg.beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    for k, g in grads.items():
        m = state.m[k]
        v = state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        update = (m / bc1) / (np.sqrt(v / bc2) + cfg.eps)
        if cfg.weight_decay:
            update = update + cfg.weight_decay * params[k]
        params[k] -= lr * update
    return lr
