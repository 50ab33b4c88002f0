"""
Calibrate Command
Search the sparsity weight λ that yields a requested expected sparsity.
"""
import argparse
import csv
from pathlib import Path
from typing import Iterable

from app.commands.common import EXIT_CALIBRATION, EXIT_OK, echo_config, load_config, load_splits, prepare_output
from app.schemas.metrics import CalibrationProbe
from app.services.training import CalibrationError, calibrate_lambda

CALIBRATION_FILE = "calibration.json"
PROBES_FILE = "probes.csv"
PROBE_FIELDS = ["lambda", "expected_sparsity", "val_loss"]


def write_probes_csv(probes: Iterable[CalibrationProbe], path: Path) -> Path:
    """Write lambda,expected_sparsity,val_loss rows sorted by λ."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=PROBE_FIELDS, lineterminator="\n")
        writer.writeheader()
        for probe in sorted(probes, key=lambda p: p.lambda_value):
            writer.writerow({
                "lambda": repr(probe.lambda_value),
                "expected_sparsity": repr(probe.expected_sparsity),
                "val_loss": repr(probe.val_loss),
            })
    return path


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, args.out)
    target = args.target_rate if args.target_rate is not None else cfg.training.target_rate
    cfg = cfg.model_copy(update={"training": cfg.training.model_copy(update={"target_rate": target})})

    out = prepare_output(cfg)
    echo_config(cfg, out)
    train_set, val_set, _ = load_splits(cfg)

    try:
        result = calibrate_lambda(target, cfg.training, train_set, val_set, cfg.calibration)
    except CalibrationError as e:
        write_probes_csv(e.probes, out / PROBES_FILE)
        print(f"❌ Calibration failed: {e}")
        print(f"   sparsity at λ_min {e.low_end:.4f}, at λ_max {e.high_end:.4f}")
        return EXIT_CALIBRATION

    (out / CALIBRATION_FILE).write_text(result.model_dump_json(indent=2) + "\n", encoding="utf-8")
    write_probes_csv(result.probes, out / PROBES_FILE)
    print(f"✅ λ = {result.lambda_value:.6g} gives expected sparsity {result.achieved_sparsity:.4f} (target {target})")
    if result.monotonicity_violations:
        print(f"⚠️  {result.monotonicity_violations} non-monotone probe pairs")
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    calibrate = subparsers.add_parser("calibrate", help="Find λ for a target expected sparsity")
    calibrate.add_argument("--config", help="Run config JSON (defaults when omitted)")
    calibrate.add_argument("--target-rate", type=float, help="Target sparsity (defaults to training.target_rate)")
    calibrate.add_argument("--out", help="Output directory (overrides output_dir)")
    calibrate.set_defaults(handler=cmd_calibrate)
