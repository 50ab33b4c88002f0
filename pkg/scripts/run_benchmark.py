"""
Multi-seed Mask Benchmark

Run this script to compare the learned mask against the uniform, variable-density
and Cartesian benchmark masks at one sampling rate:

    python scripts/run_benchmark.py --config configs/default.json --seeds 0 1 2 --out runs/benchmark

For every seed it calibrates λ (unless --no-calibrate), trains LOUPE, trains one
network per benchmark mask, and evaluates zero-filled and trained reconstructions
on the shared test split.
"""
import argparse
import os
import sys
from pathlib import Path
from typing import List

import numpy as np

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.commands.common import load_config, load_splits
from app.core import configure_logging, configure_torch
from app.schemas.config import RunConfig, dump_run_config
from app.schemas.metrics import MetricsRecord
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
from app.services.masks import benchmark_mask
from app.services.training import calibrate_lambda, train_fixed_mask, train_loupe


def seeded_config(cfg: RunConfig, seed: int) -> RunConfig:
    """Copy of cfg with the training, sampler and mask seeds set to seed."""
    sampler = cfg.training.sampler.model_copy(update={"seed": seed})
    training = cfg.training.model_copy(update={"seed": seed, "sampler": sampler})
    masks = cfg.masks.model_copy(update={"seed": seed})
    return cfg.model_copy(update={"training": training, "masks": masks})


def run_seed(cfg: RunConfig, seed: int, calibrate: bool) -> List[MetricsRecord]:
    cfg = seeded_config(cfg, seed)
    train_set, val_set, test_set = load_splits(cfg)
    height, width = train_set.height, train_set.width
    rate = cfg.training.target_rate

    if calibrate:
        print(f"🔧 [seed {seed}] calibrating λ for rate {rate}...")
        result = calibrate_lambda(rate, cfg.training, train_set, val_set, cfg.calibration)
        cfg = cfg.model_copy(update={"training": cfg.training.model_copy(update={"lambda_": result.lambda_value})})
        print(f"✅ λ = {result.lambda_value:.4g} (expected sparsity {result.achieved_sparsity:.4f})")

    print(f"🧠 [seed {seed}] training LOUPE...")
    loupe = train_loupe(train_set, val_set, cfg.training)
    probability = loupe.model.probability().detach()
    entries = [
        EvaluationEntry(method=ZERO_FILLED, mask_name="optimized", probability=probability, rate=rate),
        EvaluationEntry(method=UNET, mask_name="optimized", probability=probability, rate=rate, net=loupe.model.net),
    ]

    calib = cfg.masks.resolved_calib(height, width)
    for kind in cfg.masks.kinds:
        mask = benchmark_mask(kind, height, width, rate, calib, np.random.default_rng(seed), cfg.masks.vd_sigma_fraction)
        print(f"🧠 [seed {seed}] training U-Net behind the {kind} mask...")
        fixed = train_fixed_mask(mask, train_set, val_set, cfg.training)
        entries.append(EvaluationEntry(method=ZERO_FILLED, mask_name=kind, mask=mask))
        entries.append(EvaluationEntry(method=UNET, mask_name=kind, mask=mask, net=fixed.model.net))

    return evaluate_suite(test_set, entries, seed, cfg.evaluation.realization)


def main() -> int:
    parser = argparse.ArgumentParser(description="Multi-seed mask comparison")
    parser.add_argument("--config", help="Run config JSON")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--out", default="runs/benchmark")
    parser.add_argument("--no-calibrate", action="store_true", help="Use the configured λ as is")
    args = parser.parse_args()

    configure_logging()
    configure_torch()
    cfg = load_config(args.config, args.out)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_run_config(cfg, out / "resolved_config.json")

    print("=" * 80)
    print(f"MASK BENCHMARK: rate {cfg.training.target_rate}, seeds {args.seeds}")
    print("=" * 80)

    records: List[MetricsRecord] = []
    for seed in args.seeds:
        seed_records = run_seed(cfg, seed, calibrate=not args.no_calibrate)
        write_records_csv(seed_records, out / f"records_seed{seed}.csv")
        for row in summarize(seed_records):
            print(f"   seed {seed}  {row.method:<12} {row.mask:<10} mean {row.mean_db:7.2f} dB")
        records.extend(seed_records)

    rows = summarize(records)
    write_records_csv(records, out / "records.csv")
    write_summary_csv(rows, out / "summary.csv")
    write_paired_csv(paired_differences(records, (UNET, "uniform")), out / "paired.csv")

    print("\n📊 Summary over all seeds")
    for row in rows:
        print(f"   {row.method:<12} {row.mask:<10} mean {row.mean_db:7.2f}  median {row.median_db:7.2f}  std {row.std_db:5.2f}")
    print(f"\n✅ Results in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
