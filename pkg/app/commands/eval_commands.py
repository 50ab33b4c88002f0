"""
Eval Command
Compare zero-filled and trained reconstructions across masks on a test set.
"""
import argparse
import logging
from pathlib import Path
from typing import List, Optional, Set, Tuple

import numpy as np

from app.commands.common import EXIT_OK, UsageError, echo_config, load_config, load_splits, prepare_output
from app.core.runtime import resolve_dtype
from app.schemas.config import RunConfig
from app.schemas.metrics import MetricsRecord
from app.services.checkpoint_repository import load_checkpoint, restore_network
from app.services.data import load_dataset
from app.services.evaluation import (
    UNET,
    ZERO_FILLED,
    EvaluationEntry,
    evaluate_suite,
    paired_differences,
    summarize,
    write_paired_csv,
    write_records_csv,
    write_summary_csv,
)
from app.services.masks import benchmark_mask, weights_to_prob

logger = logging.getLogger(__name__)

RECORDS_FILE = "records.csv"
SUMMARY_FILE = "summary.csv"
PAIRED_FILE = "paired.csv"
BASELINES = [(UNET, "uniform"), (ZERO_FILLED, "uniform")]


def checkpoint_entries(path: str, cfg: RunConfig) -> List[EvaluationEntry]:
    """
    Zero-filled and network entries for one checkpoint, both behind its mask.

    Learned checkpoints contribute their probability mask at the stored target rate.
    """
    ckpt = load_checkpoint(path)
    meta = ckpt.metadata
    name = meta.get("mask", Path(path).parent.name)
    net = restore_network(ckpt, resolve_dtype(cfg.training.dtype))

    if ckpt.mask_weights is not None:
        probability = weights_to_prob(ckpt.mask_weights, meta.get("weight_slope", cfg.training.sampler.weight_slope))
        rate = meta.get("target_rate", cfg.training.target_rate)
        masks = {"probability": probability, "rate": rate}
    elif ckpt.mask_binary is not None:
        masks = {"mask": ckpt.mask_binary}
    else:
        raise UsageError(f"checkpoint {path} holds no mask tensor")

    logger.info("loaded checkpoint %s (mask %s)", path, name)
    return [
        EvaluationEntry(method=ZERO_FILLED, mask_name=name, **masks),
        EvaluationEntry(method=UNET, mask_name=name, net=net, **masks),
    ]


def benchmark_entries(cfg: RunConfig, height: int, width: int, skip: Set[str]) -> List[EvaluationEntry]:
    """Zero-filled entries for configured benchmark kinds no checkpoint already covers."""
    entries = []
    for kind in cfg.masks.kinds:
        if kind in skip:
            continue
        rng = np.random.default_rng(cfg.masks.seed)
        mask = benchmark_mask(
            kind, height, width, cfg.training.target_rate,
            cfg.masks.resolved_calib(height, width), rng, cfg.masks.vd_sigma_fraction,
        )
        entries.append(EvaluationEntry(method=ZERO_FILLED, mask_name=kind, mask=mask))
    return entries


def pick_baseline(records: List[MetricsRecord]) -> Optional[Tuple[str, str]]:
    present = {(r.method, r.mask) for r in records}
    for candidate in BASELINES:
        if candidate in present:
            return candidate
    return None


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.out)
    out = prepare_output(cfg)
    echo_config(cfg, out)

    if args.test_set:
        test_set = load_dataset(args.test_set)
    else:
        _, _, test_set = load_splits(cfg)

    entries: List[EvaluationEntry] = []
    for path in args.checkpoints or []:
        entries.extend(checkpoint_entries(path, cfg))
    covered = {e.mask_name for e in entries}
    if len(covered) * 2 != len(entries):
        raise UsageError("two checkpoints share a mask name")
    entries.extend(benchmark_entries(cfg, test_set.height, test_set.width, covered))
    if not entries:
        raise UsageError("nothing to evaluate: no checkpoints and no mask kinds configured")

    records = evaluate_suite(test_set, entries, cfg.evaluation.seed, cfg.evaluation.realization)
    write_records_csv(records, out / RECORDS_FILE)
    rows = summarize(records)
    write_summary_csv(rows, out / SUMMARY_FILE)

    baseline = pick_baseline(records)
    paired = paired_differences(records, baseline) if baseline else []
    write_paired_csv(paired, out / PAIRED_FILE)

    print(f"✅ {len(records)} records over {len(test_set)} test images (PSNR per image)")
    for row in rows:
        print(f"   {row.method:<12} {row.mask:<12} mean {row.mean_db:7.2f} dB  median {row.median_db:7.2f} dB")
        if row.n_exact:
            print(f"   {row.method:<12} {row.mask:<12} {row.n_exact} of {row.n} reconstructions are exact")
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    evaluate = subparsers.add_parser("eval", help="Evaluate masks and reconstructions on a test set")
    evaluate.add_argument("--config", help="Run config JSON (defaults when omitted)")
    evaluate.add_argument("--checkpoints", nargs="*", default=[], help="LPNW checkpoints to evaluate")
    evaluate.add_argument("--test-set", help="LPTD test set (defaults to the config's test split)")
    evaluate.add_argument("--out", help="Output directory (overrides output_dir)")
    evaluate.set_defaults(handler=cmd_eval)
