"""
Evaluation Harness
Runs every (mask, method) entry over a test set and records one PSNR per image.
"""
import logging
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence

import numpy as np
import torch
from torch import Tensor

from app.schemas.dataset import Dataset
from app.schemas.metrics import MetricsRecord
from app.services.evaluation.metrics import psnr, zero_filled
from app.services.kspace import ShapeMismatchError, undersampled_recon
from app.services.masks.sampling import binarize, mask_from_probability, sample_uniform_field, sparsity
from app.services.recon_net import ReconUNet

logger = logging.getLogger(__name__)

ZERO_FILLED = "zero_filled"
UNET = "unet"
INFERENCE_BATCH = 32

Realization = Literal["topk", "sample"]


@dataclass
class EvaluationEntry:
    """
    One row of the comparison grid.

    Either a binary ``mask`` or a learned ``probability`` with its ``rate`` must
    be given. ``net=None`` means zero-filled reconstruction.
    """
    method: str
    mask_name: str
    mask: Optional[Tensor] = None
    probability: Optional[Tensor] = None
    rate: Optional[float] = None
    net: Optional[ReconUNet] = None

    def __post_init__(self):
        if (self.mask is None) == (self.probability is None):
            raise ValueError(f"entry {self.method}/{self.mask_name} needs exactly one of mask or probability")
        if self.probability is not None and self.rate is None:
            raise ValueError(f"entry {self.method}/{self.mask_name} has a probability mask but no rate")


def realize_mask(entry: EvaluationEntry, seed: int, realization: Realization = "topk") -> Tensor:
    """
    Binary mask used at test time for an entry.

    Learned probability masks become the deterministic top-k mask at the
    entry's rate, or a seeded Bernoulli draw when realization is "sample".
    """
    if entry.mask is not None:
        return entry.mask.detach().to(torch.float64)
    probs = entry.probability.detach().to(torch.float64)
    if realization == "topk":
        return mask_from_probability(probs, entry.rate)
    if realization == "sample":
        generator = torch.Generator().manual_seed(seed)
        u = sample_uniform_field(generator, *probs.shape, dtype=torch.float64)
        return binarize(u, probs)
    raise ValueError(f"Unknown realization: {realization}")


def reconstruct(images: Tensor, mask: Tensor, net: Optional[ReconUNet]) -> Tensor:
    """
    Reconstruct a (N, H, W) stack behind a binary mask.

    Args:
        images: Ground-truth images
        mask: Binary mask (H, W)
        net: Network in inference mode, or None for zero-filled

    Returns:
        Real reconstructions (N, H, W) in float64
    """
    if net is None:
        return zero_filled(images.to(torch.float64), mask)

    dtype = next(net.parameters()).dtype
    was_training = net.training
    net.eval()
    outputs = []
    with torch.no_grad():
        for start in range(0, images.shape[0], INFERENCE_BATCH):
            batch = images[start:start + INFERENCE_BATCH].to(dtype)
            outputs.append(net(undersampled_recon(batch, mask.to(dtype))).to(torch.float64))
    net.train(was_training)
    return torch.cat(outputs, dim=0)


def evaluate_suite(
    test_set: Dataset,
    entries: Sequence[EvaluationEntry],
    seed: int,
    realization: Realization = "topk",
) -> List[MetricsRecord]:
    """
    PSNR of every entry on every test image.

    Args:
        test_set: Test images
        entries: Masks and methods to compare
        seed: Recorded with each row; also seeds sampled realizations
        realization: How learned probability masks are turned into binary masks

    Returns:
        len(entries) * len(test_set) records sorted by (method, mask, image_index)

    Raises:
        ShapeMismatchError: If an entry's mask grid differs from the test images
    """
    images = torch.from_numpy(np.ascontiguousarray(test_set.images))
    records: List[MetricsRecord] = []

    for entry in entries:
        mask = realize_mask(entry, seed, realization)
        if tuple(mask.shape) != (test_set.height, test_set.width):
            raise ShapeMismatchError(
                f"mask {entry.mask_name} is {tuple(mask.shape)}, test images are {(test_set.height, test_set.width)}"
            )
        acquired = sparsity(mask)
        recon = reconstruct(images, mask, entry.net)
        gt = images.to(torch.float64)
        for index in range(len(test_set)):
            records.append(MetricsRecord(
                method=entry.method,
                mask=entry.mask_name,
                image_index=index,
                psnr_db=psnr(recon[index], gt[index]),
                sparsity=acquired,
                seed=seed,
            ))
        logger.info("evaluated %s/%s on %d images (sparsity %.4f)", entry.method, entry.mask_name, len(test_set), acquired)

    records.sort(key=lambda r: (r.method, r.mask, r.image_index))
    return records
