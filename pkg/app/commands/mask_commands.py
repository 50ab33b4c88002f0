"""
Mask Commands
export-mask: top-k binary realisation of a learned mask plus its radial profile.
"""
import argparse
import csv
import logging
from pathlib import Path

import torch
from torch import Tensor

from app.commands.common import EXIT_OK, UsageError
from app.services.checkpoint_repository import load_checkpoint
from app.services.masks import mask_from_probability, radial_density_profile, sparsity, weights_to_prob, write_pgm

logger = logging.getLogger(__name__)

PROFILE_FILE = "profile.csv"
PROFILE_BINS = 8


def write_profile_csv(mask: Tensor, path: Path, n_bins: int = PROFILE_BINS) -> Path:
    """Write band,density rows of the radial acquisition density."""
    profile = radial_density_profile(mask, n_bins)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["band", "density"])
        for band, density in enumerate(profile.tolist()):
            writer.writerow([band, repr(density)])
    return path


def cmd_export_mask(args: argparse.Namespace) -> int:
    if not 0 < args.rate < 1:
        raise UsageError(f"--rate must be in (0, 1), got {args.rate}")
    ckpt = load_checkpoint(args.checkpoint)

    if ckpt.mask_weights is not None:
        slope = ckpt.metadata.get("weight_slope", 5.0)
        mask = mask_from_probability(weights_to_prob(ckpt.mask_weights, slope), args.rate)
    elif ckpt.mask_binary is not None:
        logger.warning("checkpoint holds a fixed mask; --rate is ignored")
        mask = ckpt.mask_binary.to(torch.float64)
    else:
        raise UsageError(f"checkpoint {args.checkpoint} holds no mask tensor")

    path = write_pgm(mask, args.out)
    profile = write_profile_csv(mask, path.parent / PROFILE_FILE)
    print(f"✅ Wrote {path} ({int(mask.sum().item())} sampled points, sparsity {sparsity(mask):.4f})")
    print(f"✅ Wrote {profile}")
    return EXIT_OK


def register(subparsers: argparse._SubParsersAction) -> None:
    export = subparsers.add_parser("export-mask", help="Write the top-k binary mask of a checkpoint as PGM")
    export.add_argument("--checkpoint", required=True, help="LPNW checkpoint")
    export.add_argument("--rate", type=float, required=True, help="Fraction of k-space to keep")
    export.add_argument("--out", required=True, help="Destination .pgm file")
    export.set_defaults(handler=cmd_export_mask)
