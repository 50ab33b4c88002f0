"""
Probabilistic Mask Sampling
Learnable weights → probability mask, uniform fields, relaxed and hard thresholding.
"""
import math
from typing import Optional

import torch
from torch import Tensor

from app.services.kspace import check_same_grid


def weights_to_prob(weights: Tensor, slope: float) -> Tensor:
    """
    Probability mask sigmoid(slope * weights).

    Args:
        weights: Unrestricted real weights (H, W)
        slope: Positive sigmoid slope t

    Returns:
        Probabilities in (0, 1), differentiable in weights
    """
    if slope <= 0:
        raise ValueError(f"slope must be positive, got {slope}")
    return torch.sigmoid(slope * weights)


def prob_to_weights(probs: Tensor, slope: float) -> Tensor:
    """Inverse of weights_to_prob for probabilities strictly inside (0, 1)."""
    return torch.logit(probs) / slope


def sample_uniform_field(
    generator: torch.Generator,
    height: int,
    width: int,
    batch: tuple = (),
    dtype: torch.dtype = torch.float64,
) -> Tensor:
    """
    I.i.d. Uniform[0, 1) field, reproducible through the generator state.

    Args:
        generator: Seeded torch generator
        height: Grid height
        width: Grid width
        batch: Optional leading batch shape
        dtype: Floating dtype of the result

    Returns:
        Tensor of shape (*batch, height, width)
    """
    return torch.rand((*batch, height, width), generator=generator, dtype=dtype)


def relaxed_threshold(u: Tensor, probs: Tensor, slope: float) -> Tensor:
    """
    Soft mask sigmoid(slope * (p - u)), the differentiable stand-in for [u <= p].

    Args:
        u: Uniform field (..., H, W)
        probs: Probability mask (H, W) or (..., H, W)
        slope: Positive threshold slope s

    Returns:
        Soft mask with the broadcast shape of u and probs
    """
    check_same_grid(u, probs, "uniform field/probability mask")
    if slope <= 0:
        raise ValueError(f"slope must be positive, got {slope}")
    return torch.sigmoid(slope * (probs - u))


def binarize(u: Tensor, probs: Tensor) -> Tensor:
    """
    Hard Bernoulli realisation: 1 where u <= p, 0 elsewhere.

    Args:
        u: Uniform field (..., H, W)
        probs: Probability mask (..., H, W)

    Returns:
        Binary mask in the floating dtype of probs
    """
    check_same_grid(u, probs, "uniform field/probability mask")
    return (u <= probs).to(probs.dtype)


def expected_sparsity(probs: Tensor) -> Tensor:
    """Mean probability, i.e. the expected acquired fraction of k-space."""
    return probs.mean()


def sparsity(mask: Tensor) -> float:
    """Acquired fraction of a binary mask."""
    return float(mask.sum().item()) / mask.numel()


def topk_count(rate: float, n: int) -> int:
    """floor(rate * n), tolerant to binary round-off just below an integer."""
    return int(math.floor(rate * n + 1e-9))


def mask_from_probability(probs: Tensor, rate: float) -> Tensor:
    """
    Deterministic binary mask keeping the floor(rate*H*W) most probable locations.

    Ties are broken by row-major index order.

    Args:
        probs: Probability mask (H, W)
        rate: Target sparsity in (0, 1)

    Returns:
        Binary mask (H, W) with exactly floor(rate*H*W) ones
    """
    if not 0 < rate < 1:
        raise ValueError(f"rate must be in (0, 1), got {rate}")
    flat = probs.detach().reshape(-1)
    keep = topk_count(rate, flat.numel())
    order = torch.argsort(-flat, stable=True)
    mask = torch.zeros_like(flat)
    mask[order[:keep]] = 1
    return mask.reshape(probs.shape)


def radial_density_profile(mask: Tensor, n_bins: int = 8, max_radius: Optional[float] = None) -> Tensor:
    """
    Mean mask value per radial band around the DC-centred k-space origin.

    Args:
        mask: Binary or probability mask (H, W)
        n_bins: Number of equal-width radius bands
        max_radius: Outer radius; defaults to the grid half-diagonal

    Returns:
        Tensor (n_bins,) of mean densities; empty bands report 0
    """
    h, w = mask.shape[-2:]
    rows = torch.arange(h, dtype=torch.float64) - h // 2
    cols = torch.arange(w, dtype=torch.float64) - w // 2
    radius = torch.sqrt(rows[:, None] ** 2 + cols[None, :] ** 2)
    if max_radius is None:
        max_radius = float(radius.max().item())

    edges = torch.linspace(0.0, max_radius, n_bins + 1, dtype=torch.float64)
    band = torch.bucketize(radius, edges[1:-1], right=True).clamp(max=n_bins - 1)
    values = mask.detach().to(torch.float64).reshape(-1)
    band = band.reshape(-1)

    totals = torch.zeros(n_bins, dtype=torch.float64).index_add_(0, band, values)
    counts = torch.zeros(n_bins, dtype=torch.float64).index_add_(0, band, torch.ones_like(values))
    return torch.where(counts > 0, totals / counts.clamp(min=1), torch.zeros_like(totals))
