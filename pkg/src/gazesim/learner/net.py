"""Small multilayer networks with hand-written reverse-mode gradients.

Parameters live in a flat name->array dict so optimizers, checkpoints and
gradient checks can treat every tensor uniformly. A network is a trunk of
hidden layers plus named linear output heads, optionally tanh-squashed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HeadSpec:
    dim: int
    squash: str | None = None  # None or "tanh"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("head dim must be >= 1")
        if self.squash not in (None, "tanh"):
            raise ValueError(f"unknown squash {self.squash!r}")


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden: tuple[int, ...]
    heads: tuple[tuple[str, HeadSpec], ...]
    activation: str = "tanh"  # or "relu"

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if len(self.hidden) < 1 or any(w < 1 for w in self.hidden):
            raise ValueError("need at least one hidden layer of positive width")
        if self.activation not in ("tanh", "relu"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.heads:
            raise ValueError("need at least one output head")

    def head(self, name: str) -> HeadSpec:
        for n, h in self.heads:
            if n == name:
                return h
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden": list(self.hidden),
            "heads": [[n, h.dim, h.squash] for n, h in self.heads],
            "activation": self.activation,
        }

    @staticmethod
    def from_dict(d: dict) -> "MlpSpec":
        heads = tuple((n, HeadSpec(dim, squash)) for n, dim, squash in d["heads"])
        return MlpSpec(input_dim=int(d["input_dim"]),
                       hidden=tuple(int(w) for w in d["hidden"]),
                       heads=heads, activation=d["activation"])


def _orthogonal(rows: int, cols: int, gain: float,
                rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))  # fix QR sign ambiguity for determinism
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols])


def init_params(spec: MlpSpec, rng: np.random.Generator,
                head_gains: dict | None = None) -> dict:
    """Orthogonal trunk initialization; per-head output gains (default 0.01)."""
    head_gains = head_gains or {}
    params: dict[str, np.ndarray] = {}
    widths = (spec.input_dim, *spec.hidden)
    for i, (fan_in, fan_out) in enumerate(zip(widths, widths[1:])):
        params[f"w{i}"] = _orthogonal(fan_out, fan_in, np.sqrt(2.0), rng)
        params[f"b{i}"] = np.zeros(fan_out)
    top = spec.hidden[-1]
    for name, head in spec.heads:
        gain = head_gains.get(name, 0.01)
        params[f"head_{name}_w"] = _orthogonal(head.dim, top, gain, rng)
        params[f"head_{name}_b"] = np.zeros(head.dim)
    return params


def _act(pre: np.ndarray, kind: str) -> np.ndarray:
    return np.tanh(pre) if kind == "tanh" else np.maximum(pre, 0.0)


def forward(params: dict, spec: MlpSpec, x: np.ndarray):
    """Run the network; returns (outputs dict, cache for backward).

    ``x`` may be a single input (D,) or a batch (B, D); outputs match.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[-1] != spec.input_dim:
        raise ValueError(f"input width {h.shape[-1]} != spec {spec.input_dim}")
    acts = [h]
    for i in range(len(spec.hidden)):
        pre = h @ params[f"w{i}"].T + params[f"b{i}"]
        h = _act(pre, spec.activation)
        acts.append(h)
    outputs = {}
    head_raw = {}
    for name, head in spec.heads:
        out = h @ params[f"head_{name}_w"].T + params[f"head_{name}_b"]
        if head.squash == "tanh":
            out = np.tanh(out)
        head_raw[name] = out
        outputs[name] = out[0] if single else out
    cache = {"acts": acts, "heads": head_raw, "single": single}
    return outputs, cache


def backward(params: dict, spec: MlpSpec, cache: dict, grad_outputs: dict) -> dict:
    """Exact gradients of sum(grad_outputs * outputs) w.r.t. every parameter."""
    acts = cache["acts"]
    top = acts[-1]
    grads: dict[str, np.ndarray] = {}
    d_top = np.zeros_like(top)
    for name, head in spec.heads:
        if name not in grad_outputs:
            continue
        g = np.asarray(grad_outputs[name], dtype=float)
        if cache["single"] and g.ndim == 1:
            g = g[None, :]
        if head.squash == "tanh":
            g = g * (1.0 - cache["heads"][name] ** 2)
        grads[f"head_{name}_w"] = g.T @ top
        grads[f"head_{name}_b"] = g.sum(axis=0)
        d_top = d_top + g @ params[f"head_{name}_w"]

    dh = d_top
    for i in range(len(spec.hidden) - 1, -1, -1):
        a = acts[i + 1]
        if spec.activation == "tanh":
            dpre = dh * (1.0 - a * a)
        else:
            dpre = dh * (a > 0.0)
        grads[f"w{i}"] = dpre.T @ acts[i]
        grads[f"b{i}"] = dpre.sum(axis=0)
        if i > 0:
            dh = dpre @ params[f"w{i}"]
    return grads


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def sample_categorical(logits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Sample action indices from rows of logits; returns (B,) ints."""
    p = softmax(np.atleast_2d(logits))
    u = rng.random(p.shape[0])
    cdf = np.cumsum(p, axis=-1)
    return (u[:, None] > cdf).sum(axis=-1)
