"""Command-line entry points.

Subcommands: render, synth, train-search, eval-search, train-bcrl.
Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checkpoint import CheckpointError
from .config import ConfigError, RunConfig, load_config, replace_config
from .envs.dataset import DatasetError
from .runs import (run_eval_search, run_render, run_synth, run_train_bcrl,
                   run_train_search)

USAGE_EXIT = 1
RUNTIME_EXIT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; we use 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gazesim",
                     description="Gaze simulation, search training and "
                                 "BC-RL co-training on panoramas.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", type=Path, required=needs_config,
                       help="run config JSON")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", type=Path, required=True,
                       help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="cap on environment parallelism")

    p = sub.add_parser("render", help="render one view from a panorama")
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--panorama", type=Path, required=True)
    p.add_argument("--azimuth", type=float, default=0.0, help="degrees")
    p.add_argument("--elevation", type=float, default=0.0, help="degrees")
    p.add_argument("--fov", type=float, default=90.0, help="degrees")
    p.add_argument("--resolution", type=int, default=224)
    p.add_argument("--projection", choices=("pinhole", "fisheye"),
                   default="pinhole")
    p.add_argument("--out", type=Path, required=True, help="output image path")

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    common(p)

    p = sub.add_parser("train-search", help="PPO-train a search policy")
    common(p)
    p.add_argument("--budget-steps", type=int, default=None)
    p.add_argument("--checkpoint", type=Path, default=None,
                   help="resume from this checkpoint")

    p = sub.add_parser("eval-search", help="evaluate a search policy")
    common(p)
    p.add_argument("--checkpoint", type=Path, default=None)
    p.add_argument("--policy", choices=("checkpoint", "random", "oracle"),
                   default="checkpoint")

    p = sub.add_parser("train-bcrl", help="co-train the eye and hand agents")
    common(p)
    p.add_argument("--budget-steps", type=int, default=None)
    p.add_argument("--checkpoint", type=Path, default=None,
                   help="resume from this checkpoint")
    p.add_argument("--eye-mode", choices=("policy", "oracle", "random"),
                   default="policy", help="ablation: freeze the eye behavior")

    return parser


def _load_run_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        overrides["workers"] = args.workers
    if getattr(args, "budget_steps", None) is not None:
        if args.budget_steps < 1:
            raise UsageError("--budget-steps must be >= 1")
        overrides["budget_steps"] = args.budget_steps
    return replace_config(cfg, **overrides) if overrides else cfg


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return USAGE_EXIT

    try:
        if args.command == "render":
            cfg = load_config(args.config) if args.config else None
            resolution = args.resolution
            projection = args.projection
            if cfg is not None:
                resolution = cfg.pyramid.resolution
                projection = cfg.pyramid.projection
            out = run_render(args.panorama, args.azimuth, args.elevation,
                             args.fov, args.out, resolution=resolution,
                             projection=projection)
            print(f"wrote {out}")
        elif args.command == "synth":
            cfg = _load_run_config(args)
            out = run_synth(cfg, args.out)
            print(f"wrote dataset to {out}")
        elif args.command == "train-search":
            cfg = _load_run_config(args)
            result = run_train_search(cfg, args.out, resume=args.checkpoint,
                                      progress=_print_progress)
            print(f"done: {result['final']}")
        elif args.command == "eval-search":
            cfg = _load_run_config(args)
            summary = run_eval_search(cfg, args.out, checkpoint=args.checkpoint,
                                      policy_kind=args.policy)
            print(f"eval summary: {summary}")
        elif args.command == "train-bcrl":
            cfg = _load_run_config(args)
            result = run_train_bcrl(cfg, args.out, resume=args.checkpoint,
                                    eye_mode=args.eye_mode,
                                    progress=_print_progress)
            print(f"done: final BC L1 {result['final_bc_l1']:.4f}")
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except (CheckpointError, DatasetError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_EXIT
    return 0


def _print_progress(record: dict) -> None:
    step = record.get("step", "?")
    parts = [f"step {step}"]
    for key in ("reward_mean", "bc_loss", "entropy", "clip_fraction"):
        if key in record:
            parts.append(f"{key}={record[key]:.4f}")
    print("  ".join(parts))


if __name__ == "__main__":
    sys.exit(main())
