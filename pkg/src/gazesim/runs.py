"""Reproducible run orchestration for the command-line entry points.

Every run writes into its output directory: the fully resolved config
(seed included), a line-delimited metrics stream, periodic checkpoints,
and for evaluations a per-target/per-episode record stream plus an
aggregate summary. Identical config + seed reproduces identical streams
byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .config import RunConfig, save_config
from .envs import (ObjectSearchEnv, ReplayEnv, SceneSearchEnv,
                   generate_synthetic_dataset, load_dataset,
                   run_scene_search_eval)
from .gimbal import STAY_ACTION
from .kinematics import builtin_chain_path, load_chain
from .learner import (AdamWConfig, CoTrainState, HeadSpec, MlpEyePolicy,
                      MlpSpec, ObservationEncoder, OptimState, OracleEyePolicy,
                      RandomEyePolicy, SearchTrainState, bcrl_iteration, forward,
                      init_params, search_iteration)
from .learner.loop import encode_shared
from .panorama import (ViewSpec, angles_from_dir, load_panorama, render_view,
                       save_image)
from .rewards import BlockMeanExtractor


class MetricsWriter:
    """Line-delimited JSON records, flushed per line, stable key order."""

    def __init__(self, path, append: bool = False):
        self.path = Path(path)
        self._f = open(self.path, "a" if append else "w")

    def write(self, record: dict) -> None:
        clean = {k: (float(v) if isinstance(v, (np.floating, float)) else v)
                 for k, v in record.items()}
        self._f.write(json.dumps(clean, sort_keys=True) + "\n")
        self._f.flush()

    def close(self) -> None:
        self._f.close()


def _write_summary(out_dir: Path, summary: dict) -> None:
    with open(out_dir / "summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")


def _rng_state(rng: np.random.Generator) -> dict:
    return rng.bit_generator.state


def _restore_rng(state: dict) -> np.random.Generator:
    rng = np.random.default_rng(0)
    rng.bit_generator.state = state
    return rng


# --- render / synth --------------------------------------------------------


def run_render(pano_path, azimuth_deg: float, elevation_deg: float,
               fov_deg: float, out_path, resolution: int = 224,
               projection: str = "pinhole") -> Path:
    pano = load_panorama(pano_path)
    view = ViewSpec(math.radians(azimuth_deg), math.radians(elevation_deg),
                    math.radians(fov_deg), resolution, projection)
    raster = render_view(pano, view)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_image(out_path, raster)
    return out_path


def run_synth(cfg: RunConfig, out_dir) -> Path:
    out_dir = Path(out_dir)
    rng = np.random.default_rng(cfg.seed)
    generate_synthetic_dataset(cfg.synth, rng, out_dir)
    return out_dir


# --- shared builders -------------------------------------------------------


def _extractor(cfg: RunConfig) -> BlockMeanExtractor:
    return BlockMeanExtractor(cfg.learner.extractor_grid)


def _eye_spec(input_dim: int, cfg: RunConfig) -> MlpSpec:
    return MlpSpec(input_dim=input_dim, hidden=tuple(cfg.learner.eye_hidden),
                   heads=(("policy", HeadSpec(9)), ("value", HeadSpec(1))),
                   activation=cfg.learner.activation)


def _updates_per_iteration(batch: int, epochs: int, minibatch: int) -> int:
    return epochs * math.ceil(batch / minibatch)


def _search_envs(cfg: RunConfig, dataset):
    fx = _extractor(cfg)
    if cfg.task == "object":
        envs = [ObjectSearchEnv(dataset.episodes, cfg.gimbal, cfg.pyramid, fx,
                                cfg.search) for _ in range(cfg.num_envs)]
    else:
        panoramas = [ep.frame(0) for ep in dataset.episodes]
        envs = [SceneSearchEnv(panoramas, cfg.gimbal, cfg.pyramid, fx,
                               cfg.search) for _ in range(cfg.num_envs)]
    encoder = ObservationEncoder(fx, cfg.pyramid.num_levels, proprio_dim=0,
                                 include_target=cfg.search.conditioned)
    return envs, encoder, fx


def _search_state(cfg: RunConfig, encoder) -> SearchTrainState:
    spec = _eye_spec(encoder.dim, cfg)
    rng = np.random.default_rng(cfg.seed)
    params = init_params(spec, rng, head_gains={"policy": 0.01, "value": 1.0})
    iters = max(1, cfg.budget_steps // (cfg.num_envs * cfg.search.episode_steps))
    total_updates = iters * _updates_per_iteration(
        cfg.num_envs * cfg.search.episode_steps, cfg.ppo.epochs, cfg.ppo.minibatch)
    opt_cfg = AdamWConfig(lr0=cfg.ppo.eye_lr0, total_steps=total_updates,
                          weight_decay=cfg.learner.weight_decay)
    return SearchTrainState(params=params, spec=spec, opt=OptimState(params),
                            opt_cfg=opt_cfg, ppo=cfg.ppo, rng=rng)


def _save_search_checkpoint(path, state: SearchTrainState) -> None:
    save_checkpoint(
        path, kind="search", step=state.env_steps, iteration=state.iteration,
        rng_state=_rng_state(state.rng), specs={"eye": state.spec.to_dict()},
        tensors={"eye": state.params, "eye_m": state.opt.m, "eye_v": state.opt.v},
        scalars={"opt_step": state.opt.step})


def _load_search_checkpoint(path, state: SearchTrainState) -> SearchTrainState:
    header = load_checkpoint(path)
    if header["kind"] != "search":
        raise CheckpointError(f"{path}: expected a search checkpoint")
    if header["specs"]["eye"] != state.spec.to_dict():
        raise CheckpointError(
            f"{path}: checkpoint network spec does not match the config")
    state.params = header["tensors"]["eye"]
    state.opt.m = header["tensors"]["eye_m"]
    state.opt.v = header["tensors"]["eye_v"]
    state.opt.step = int(header["scalars"]["opt_step"])
    state.env_steps = header["step"]
    state.iteration = header["iteration"]
    state.rng = _restore_rng(header["rng_state"])
    return state


# --- search training / evaluation ------------------------------------------


def run_train_search(cfg: RunConfig, out_dir, resume=None,
                     progress=None) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(out_dir / "config.json", cfg)
    if cfg.dataset is None:
        raise ValueError("train-search needs a dataset path in the config")
    dataset = load_dataset(cfg.dataset)
    envs, encoder, _ = _search_envs(cfg, dataset)
    state = _search_state(cfg, encoder)
    if resume is not None:
        state = _load_search_checkpoint(resume, state)

    writer = MetricsWriter(out_dir / "metrics.jsonl", append=resume is not None)
    iters = max(1, cfg.budget_steps // (cfg.num_envs * cfg.search.episode_steps))
    ckpt_path = out_dir / "checkpoint.bin"
    last = {}
    while state.iteration < iters:
        last = search_iteration(state, envs, encoder)
        writer.write(last)
        if progress is not None:
            progress(last)
        if state.iteration % cfg.checkpoint_every == 0 or state.iteration == iters:
            _save_search_checkpoint(ckpt_path, state)
    _save_search_checkpoint(ckpt_path, state)
    writer.close()
    _write_summary(out_dir, {"final": last, "iterations": state.iteration,
                             "env_steps": state.env_steps})
    return {"state": state, "checkpoint": ckpt_path,
            "metrics": out_dir / "metrics.jsonl", "final": last}


def _policy_from(kind: str, checkpoint, cfg: RunConfig, encoder):
    if kind == "random":
        return RandomEyePolicy()
    if kind == "oracle":
        return OracleEyePolicy()
    if checkpoint is None:
        raise ValueError("eval needs --checkpoint unless --policy is "
                         "random or oracle")
    header = load_checkpoint(checkpoint)
    spec = MlpSpec.from_dict(header["specs"]["eye"])
    if spec.input_dim != encoder.dim:
        raise CheckpointError(
            f"checkpoint expects input dim {spec.input_dim}, config produces "
            f"{encoder.dim}")
    return MlpEyePolicy(header["tensors"]["eye"], spec, encoder)


def eval_object_search(policy, cfg: RunConfig, dataset,
                       rng: np.random.Generator, writer=None) -> dict:
    """Success = gaze within ``success_angle`` of the target within the
    first ``success_within`` steps of an episode."""
    fx = _extractor(cfg)
    env = ObjectSearchEnv(dataset.episodes, cfg.gimbal, cfg.pyramid, fx,
                          cfg.search)
    teleporting = getattr(policy, "teleport_to_target", False)
    successes, min_angles = [], []
    for ep in range(cfg.eval.episodes):
        obs = env.reset(rng)
        t_az, t_el = env.target_angles()
        target_dir = env.target_direction
        best = math.acos(min(1.0, max(-1.0, float(
            np.dot(env.gaze.direction(), target_dir)))))
        hit = None
        for t in range(cfg.eval.success_within):
            if teleporting:
                env.snap_gaze(t_az, t_el)
                action = STAY_ACTION
            else:
                action = policy.act_obs(obs, rng)
            res = env.step(action)
            obs = res.observation
            angle = math.acos(min(1.0, max(-1.0, float(
                np.dot(env.gaze.direction(), target_dir)))))
            if angle < best:
                best = angle
            if hit is None and angle <= cfg.eval.success_angle:
                hit = t + 1
        successes.append(hit is not None)
        min_angles.append(best)
        if writer is not None:
            writer.write({"episode": ep, "success": bool(hit is not None),
                          "min_angle_deg": math.degrees(best),
                          "steps_to_success": hit})
    return {
        "episodes": cfg.eval.episodes,
        "success_rate": float(np.mean(successes)),
        "mean_min_angle_deg": float(np.mean([math.degrees(a) for a in min_angles])),
    }


def run_eval_search(cfg: RunConfig, out_dir, checkpoint=None,
                    policy_kind: str = "checkpoint") -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(out_dir / "config.json", cfg)
    dataset_path = cfg.eval_dataset or cfg.dataset
    if dataset_path is None:
        raise ValueError("eval-search needs a dataset (eval_dataset or dataset)")
    dataset = load_dataset(dataset_path)
    fx = _extractor(cfg)
    encoder = ObservationEncoder(fx, cfg.pyramid.num_levels, proprio_dim=0,
                                 include_target=cfg.search.conditioned)
    policy = _policy_from(policy_kind, checkpoint, cfg, encoder)
    rng = np.random.default_rng(cfg.seed)
    writer = MetricsWriter(out_dir / "eval_records.jsonl")

    if cfg.task == "object":
        summary = eval_object_search(policy, cfg, dataset, rng, writer)
    else:
        panoramas = [ep.frame(0)
                     for ep in dataset.episodes[:cfg.eval.scene_images]]
        metrics = run_scene_search_eval(
            policy, panoramas, fx, cfg.gimbal, cfg.pyramid, rng,
            grid=tuple(cfg.eval.scene_grid), crop_fov=cfg.eval.scene_crop_fov,
            steps_per_target=cfg.eval.scene_steps_per_target,
            crop_resolution=cfg.eval.scene_crop_resolution)
        for rec in metrics.records:
            writer.write(rec)
        summary = {"mean_similarity": metrics.mean_similarity,
                   "exact_match_rate": metrics.exact_match_rate,
                   "targets": len(metrics.records)}
    writer.close()
    summary["policy"] = policy_kind
    _write_summary(out_dir, summary)
    return summary


# --- BC-RL co-training ------------------------------------------------------


def _load_bcrl_chain(cfg: RunConfig, dataset):
    if cfg.chain:
        path = Path(cfg.chain)
        if not path.exists():
            path = builtin_chain_path(cfg.chain)
        return load_chain(path)
    if dataset.chain is None:
        raise ValueError("BC-RL needs a chain: dataset chain.json or config "
                         "chain path")
    return dataset.chain


def _bcrl_state(cfg: RunConfig, eye_dim: int, bc_dim: int,
                chunk_entries: int) -> CoTrainState:
    rng = np.random.default_rng(cfg.seed)
    eye_spec = _eye_spec(eye_dim, cfg)
    eye_params = init_params(eye_spec, rng,
                             head_gains={"policy": 0.01, "value": 1.0})
    bc_spec = MlpSpec(input_dim=bc_dim, hidden=tuple(cfg.learner.bc_hidden),
                      heads=(("chunk", HeadSpec(chunk_entries, squash="tanh")),),
                      activation=cfg.learner.activation)
    bc_params = init_params(bc_spec, rng, head_gains={"chunk": 0.01})

    iters = max(1, cfg.budget_steps // (cfg.num_envs * cfg.schedule.total_steps))
    eye_updates = iters * _updates_per_iteration(
        cfg.num_envs * cfg.schedule.total_steps, cfg.ppo.epochs, cfg.ppo.minibatch)
    scored = cfg.num_envs * (cfg.schedule.total_steps - cfg.schedule.pause_steps)
    bc_updates = iters * _updates_per_iteration(
        scored, cfg.learner.bc_epochs, cfg.learner.bc_minibatch)
    eye_opt_cfg = AdamWConfig(lr0=cfg.ppo.eye_lr0, total_steps=eye_updates,
                              weight_decay=cfg.learner.weight_decay)
    bc_opt_cfg = AdamWConfig(lr0=cfg.ppo.bc_lr0, total_steps=bc_updates,
                             weight_decay=cfg.learner.weight_decay)
    return CoTrainState(
        eye_params=eye_params, eye_spec=eye_spec, eye_opt=OptimState(eye_params),
        eye_opt_cfg=eye_opt_cfg, bc_params=bc_params, bc_spec=bc_spec,
        bc_opt=OptimState(bc_params), bc_opt_cfg=bc_opt_cfg, ppo=cfg.ppo, rng=rng)


def _save_bcrl_checkpoint(path, state: CoTrainState, eye_mode: str) -> None:
    save_checkpoint(
        path, kind="bcrl", step=state.env_steps, iteration=state.iteration,
        rng_state=_rng_state(state.rng),
        specs={"eye": state.eye_spec.to_dict(), "bc": state.bc_spec.to_dict(),
               "eye_mode": eye_mode},
        tensors={"eye": state.eye_params, "eye_m": state.eye_opt.m,
                 "eye_v": state.eye_opt.v, "bc": state.bc_params,
                 "bc_m": state.bc_opt.m, "bc_v": state.bc_opt.v},
        scalars={"eye_opt_step": state.eye_opt.step,
                 "bc_opt_step": state.bc_opt.step})


def _load_bcrl_checkpoint(path, state: CoTrainState) -> CoTrainState:
    header = load_checkpoint(path)
    if header["kind"] != "bcrl":
        raise CheckpointError(f"{path}: expected a bcrl checkpoint")
    if (header["specs"]["eye"] != state.eye_spec.to_dict()
            or header["specs"]["bc"] != state.bc_spec.to_dict()):
        raise CheckpointError(
            f"{path}: checkpoint network specs do not match the config")
    t = header["tensors"]
    state.eye_params, state.bc_params = t["eye"], t["bc"]
    state.eye_opt.m, state.eye_opt.v = t["eye_m"], t["eye_v"]
    state.bc_opt.m, state.bc_opt.v = t["bc_m"], t["bc_v"]
    state.eye_opt.step = int(header["scalars"]["eye_opt_step"])
    state.bc_opt.step = int(header["scalars"]["bc_opt_step"])
    state.env_steps = header["step"]
    state.iteration = header["iteration"]
    state.rng = _restore_rng(header["rng_state"])
    return state


def run_train_bcrl(cfg: RunConfig, out_dir, resume=None, eye_mode: str = "policy",
                   progress=None) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_config(out_dir / "config.json", cfg)
    if cfg.dataset is None:
        raise ValueError("train-bcrl needs a dataset path in the config")
    dataset = load_dataset(cfg.dataset)
    chain = _load_bcrl_chain(cfg, dataset)
    fx = _extractor(cfg)
    envs = [ReplayEnv(dataset, chain, cfg.schedule, cfg.gimbal, cfg.pyramid)
            for _ in range(cfg.num_envs)]
    num_joints = chain.chain.num_joints
    eye_dim = cfg.pyramid.num_levels * fx.dim + 3
    bc_dim = eye_dim + num_joints
    chunk_entries = cfg.schedule.chunk_size * num_joints
    state = _bcrl_state(cfg, eye_dim, bc_dim, chunk_entries)
    if resume is not None:
        state = _load_bcrl_checkpoint(resume, state)

    writer = MetricsWriter(out_dir / "metrics.jsonl", append=resume is not None)
    iters = max(1, cfg.budget_steps // (cfg.num_envs * cfg.schedule.total_steps))
    ckpt_path = out_dir / "checkpoint.bin"
    last = {}
    while state.iteration < iters:
        last = bcrl_iteration(state, envs, fx, eye_mode=eye_mode,
                              bc_epochs=cfg.learner.bc_epochs,
                              bc_minibatch=cfg.learner.bc_minibatch)
        writer.write(last)
        if progress is not None:
            progress(last)
        if state.iteration % cfg.checkpoint_every == 0 or state.iteration == iters:
            _save_bcrl_checkpoint(ckpt_path, state, eye_mode)
    _save_bcrl_checkpoint(ckpt_path, state, eye_mode)
    writer.close()

    eval_rng = np.random.default_rng(cfg.seed + 1_000_003)
    final_l1 = eval_bcrl_l1(state, envs[0], fx, eye_mode,
                            episodes=cfg.eval.episodes, rng=eval_rng)
    summary = {"final": last, "iterations": state.iteration,
               "env_steps": state.env_steps, "eye_mode": eye_mode,
               "final_bc_l1": final_l1}
    _write_summary(out_dir, summary)
    return {"state": state, "checkpoint": ckpt_path, "final_bc_l1": final_l1,
            "metrics": out_dir / "metrics.jsonl", "final": last}


def eval_bcrl_l1(state: CoTrainState, env: ReplayEnv, fx, eye_mode: str,
                 episodes: int, rng: np.random.Generator) -> float:
    """Mean cloning L1 over the scored steps of fresh evaluation episodes."""
    losses = []
    for _ in range(episodes):
        obs = env.reset(rng)
        if eye_mode == "oracle":
            az, el = angles_from_dir(
                env.episode.target_direction(env.frame_index))
            env.snap_gaze(az, el)
            obs = env.observe()
        for t in range(env.schedule.total_steps):
            scored = (t + 1) > env.schedule.pause_steps
            shared = encode_shared(obs, fx)
            pred = None
            if scored:
                bc_in = np.concatenate([shared, obs.proprio])
                outs, _ = forward(state.bc_params, state.bc_spec, bc_in)
                pred = outs["chunk"]
                gt = env.gt_chunk().reshape(-1)
                losses.append(float(np.abs(pred - gt).mean()))
            if eye_mode == "policy":
                outs, _ = forward(state.eye_params, state.eye_spec, shared)
                logits = outs["policy"]
                p = np.exp(logits - logits.max())
                p /= p.sum()
                action = int((rng.random() > np.cumsum(p)).sum())
            elif eye_mode == "random":
                action = int(rng.integers(9))
            else:
                action = STAY_ACTION
            res = env.step(
                action, pred.reshape(env.schedule.chunk_size, -1)
                if pred is not None else None)
            obs = res.observation
            if eye_mode == "oracle":
                az, el = angles_from_dir(
                    env.episode.target_direction(env.frame_index))
                env.snap_gaze(az, el)
                obs = env.observe()
    return float(np.mean(losses))
