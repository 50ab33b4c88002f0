"""
Reconstruction Metrics
PSNR with a per-image peak, and the zero-filled baseline reconstruction.
"""
import math

import torch
from torch import Tensor

from app.services.kspace import ShapeMismatchError, magnitude, undersampled_recon

EXACT = math.inf
EXACT_LABEL = "exact"


class EmptyReferenceError(ValueError):
    """Raised when the reference image is identically zero (no PSNR peak)"""
    pass


def psnr(recon: Tensor, gt: Tensor) -> float:
    """
    Peak signal-to-noise ratio 20 * log10(max(gt) / rmse(recon - gt)).

    Args:
        recon: Reconstructed real image (H, W)
        gt: Ground-truth real image (H, W)

    Returns:
        PSNR in dB, or +inf (EXACT) when the images are identical

    Raises:
        ShapeMismatchError: If the grids differ
        EmptyReferenceError: If gt is all zeros
    """
    if recon.shape != gt.shape:
        raise ShapeMismatchError(f"reconstruction {tuple(recon.shape)} vs reference {tuple(gt.shape)}")

    gt64 = gt.detach().to(torch.float64)
    diff = recon.detach().to(torch.float64) - gt64
    peak = float(gt64.max().item())
    if peak <= 0.0:
        raise EmptyReferenceError("PSNR is undefined for an all-zero reference")

    rmse = float(torch.sqrt(torch.mean(diff * diff)).item())
    if rmse == 0.0:
        return EXACT
    return 20.0 * math.log10(peak / rmse)


def zero_filled(x: Tensor, mask: Tensor) -> Tensor:
    """Magnitude of the inverse DFT of the masked, zero-filled k-space."""
    return magnitude(undersampled_recon(x, mask))


def format_psnr(value: float) -> str:
    """CSV rendering of a PSNR value; infinite values become "exact"."""
    return EXACT_LABEL if math.isinf(value) else repr(float(value))
