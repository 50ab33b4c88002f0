"""
Train Command
Joint LOUPE training or network training behind a fixed benchmark/PGM mask.
"""
import argparse
import logging
from pathlib import Path
from typing import Tuple

import numpy as np
from torch import Tensor

from app.commands.common import (
    EXIT_DIVERGENCE,
    EXIT_OK,
    UsageError,
    echo_config,
    load_config,
    load_splits,
    prepare_output,
)
from app.schemas.config import RunConfig
from app.services.checkpoint_repository import MASK_BINARY, MASK_WEIGHTS, build_checkpoint, save_checkpoint
from app.services.masks import benchmark_mask, read_mask_pgm, write_pgm
from app.services.training import DivergenceError, train_fixed_mask, train_loupe, write_history_csv

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.lpnw"
HISTORY_FILE = "history.csv"
PROB_MASK_FILE = "prob_mask.pgm"
OPTIMIZED = "optimized"
MASK_KINDS = ("uniform", "vardens", "cartesian")


def resolve_fixed_mask(spec: str, cfg: RunConfig, height: int, width: int) -> Tuple[str, Tensor]:
    """
    Turn a --mask argument into (mask name, binary mask).

    Args:
        spec: Benchmark kind or path to a PGM mask
        cfg: Run config (target rate, calibration size, mask seed)
        height: Grid height
        width: Grid width

    Returns:
        Name recorded in the checkpoint and the (H, W) mask
    """
    if spec in MASK_KINDS:
        rng = np.random.default_rng(cfg.masks.seed)
        mask = benchmark_mask(
            spec, height, width, cfg.training.target_rate,
            cfg.masks.resolved_calib(height, width), rng, cfg.masks.vd_sigma_fraction,
        )
        return spec, mask

    path = Path(spec)
    if not path.exists():
        raise UsageError(f"--mask must be one of {', '.join(MASK_KINDS)} or an existing PGM file, got {spec}")
    mask = read_mask_pgm(path)
    if tuple(mask.shape) != (height, width):
        raise UsageError(f"mask {path} is {tuple(mask.shape)}, images are {(height, width)}")
    return path.stem, mask


def _metadata(mode: str, mask_name: str, cfg: RunConfig, height: int, width: int) -> dict:
    return {
        "mode": mode,
        "mask": mask_name,
        "height": height,
        "width": width,
        "weight_slope": cfg.training.sampler.weight_slope,
        "target_rate": cfg.training.target_rate,
    }


def cmd_train(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.out)
    if args.mode == "fixed" and not args.mask:
        raise UsageError("--mask is required with --mode fixed")

    out = prepare_output(cfg)
    echo_config(cfg, out)
    train_set, val_set, _ = load_splits(cfg)
    height, width = train_set.height, train_set.width

    try:
        if args.mode == "loupe":
            mask_name = OPTIMIZED
            result = train_loupe(train_set, val_set, cfg.training)
        else:
            mask_name, mask = resolve_fixed_mask(args.mask, cfg, height, width)
            result = train_fixed_mask(mask, train_set, val_set, cfg.training)
    except DivergenceError as e:
        if e.history is not None:
            write_history_csv(e.history, out / HISTORY_FILE)
        print(f"❌ Training diverged: {e} (history written to {out / HISTORY_FILE})")
        return EXIT_DIVERGENCE

    write_history_csv(result.history, out / HISTORY_FILE)
    model = result.model
    if args.mode == "loupe":
        mask_tensors = {MASK_WEIGHTS: model.mask_weights}
        write_pgm(model.probability(), out / PROB_MASK_FILE)
    else:
        mask_tensors = {MASK_BINARY: model.mask}

    ckpt = build_checkpoint(model.net, _metadata(args.mode, mask_name, cfg, height, width), mask_tensors)
    save_checkpoint(ckpt, out / CHECKPOINT_FILE)

    best = result.history.best_epoch
    print(f"✅ Trained {args.mode} ({mask_name}) for {len(result.history)} epochs, best epoch {best}")
    print(f"✅ Outputs in {out}")
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    train = subparsers.add_parser("train", help="Train LOUPE or a network behind a fixed mask")
    train.add_argument("--config", help="Run config JSON (defaults when omitted)")
    train.add_argument("--mode", choices=["loupe", "fixed"], default="loupe")
    train.add_argument("--mask", help="uniform | vardens | cartesian | path to a PGM mask (mode=fixed)")
    train.add_argument("--out", help="Output directory (overrides output_dir)")
    train.set_defaults(handler=cmd_train)
