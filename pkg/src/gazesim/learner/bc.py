"""Behavior-cloning regression: L1 loss on tanh-squashed action chunks."""

from __future__ import annotations

import numpy as np

from .net import MlpSpec, backward, forward
from .optim import AdamWConfig, OptimState, adamw_step


def bc_loss(params: dict, spec: MlpSpec, inputs, targets) -> float:
    """Mean absolute error of the chunk head over a batch (no update)."""
    outs, _ = forward(params, spec, np.atleast_2d(inputs))
    pred = outs["chunk"]
    gt = np.asarray(targets, dtype=float).reshape(pred.shape)
    return float(np.abs(pred - gt).mean())


def bc_update(params: dict, spec: MlpSpec, inputs, targets,
              opt_state: OptimState, opt_cfg: AdamWConfig,
              epochs: int = 1, minibatch: int | None = None,
              rng: np.random.Generator | None = None) -> float:
    """Optimize the chunk head with L1 loss; returns the mean observed loss.

    Defaults take one full-batch optimizer step. ``epochs``/``minibatch``
    (with an rng for shuffling) enable multiple passes, mirroring the
    policy update's inner loop during co-training.
    """
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    n = x.shape[0]
    gt = np.asarray(targets, dtype=float).reshape(n, -1)
    mb = n if minibatch is None else min(minibatch, n)

    total, count = 0.0, 0
    for _ in range(max(1, epochs)):
        order = rng.permutation(n) if rng is not None else np.arange(n)
        for lo in range(0, n, mb):
            idx = order[lo:lo + mb]
            outs, cache = forward(params, spec, x[idx])
            pred = outs["chunk"]
            err = pred - gt[idx]
            loss = float(np.abs(err).mean())
            d_pred = np.sign(err) / err.size
            grads = backward(params, spec, cache, {"chunk": d_pred})
            adamw_step(params, grads, opt_state, opt_cfg)
            total += loss
            count += 1
    return total / max(count, 1)
