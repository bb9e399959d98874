"""Differentiable policy/value/cloning networks and the co-training loops."""

from .bc import bc_loss, bc_update
from .encode import ObservationEncoder
from .ensemble import ChunkEnsembler, temporal_ensemble
from .loop import (CoTrainState, SearchTrainState, bcrl_iteration, encode_shared,
                   search_iteration)
from .net import (HeadSpec, MlpSpec, backward, forward, init_params, log_softmax,
                  sample_categorical, softmax)
from .optim import AdamWConfig, OptimState, adamw_step, lr_at
from .policy import MlpEyePolicy, OracleEyePolicy, RandomEyePolicy
from .rl import NanLossError, PpoConfig, entropy_of_logits, gae, ppo_update

__all__ = [
    "AdamWConfig", "ChunkEnsembler", "CoTrainState", "HeadSpec", "MlpEyePolicy",
    "MlpSpec", "NanLossError", "ObservationEncoder", "OptimState",
    "OracleEyePolicy", "PpoConfig", "RandomEyePolicy", "SearchTrainState",
    "adamw_step", "backward", "bc_loss", "bc_update", "bcrl_iteration",
    "encode_shared", "entropy_of_logits", "forward", "gae", "init_params",
    "log_softmax", "lr_at", "ppo_update", "sample_categorical",
    "search_iteration", "softmax", "temporal_ensemble",
]
