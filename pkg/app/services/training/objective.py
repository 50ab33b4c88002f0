"""
Training Objectives
Joint mask + network model, fixed-mask model, and the LOUPE loss with exact gradients.
"""
import math
from typing import Dict, Optional, Tuple

import torch
import torch.nn as nn
from torch import Tensor

from app.schemas.config import SamplerConfig, TrainingConfig
from app.services.kspace import ShapeMismatchError, undersampled_recon
from app.services.masks.sampling import (
    expected_sparsity,
    prob_to_weights,
    relaxed_threshold,
    sample_uniform_field,
    weights_to_prob,
)
from app.services.recon_net import ReconUNet, init_params

INIT_PROB_LOW = 0.01
INIT_PROB_HIGH = 0.99


class DivergenceError(RuntimeError):
    """Raised when the loss or its gradients become non-finite"""

    def __init__(self, message: str, history=None, state=None):
        super().__init__(message)
        self.history = history
        self.state = state


class LoupeModel(nn.Module):
    """Learnable k-space weights (one per location) and the anti-aliasing network"""

    def __init__(self, height: int, width: int, cfg: TrainingConfig, generator: torch.Generator, dtype: torch.dtype):
        super().__init__()
        self.sampler: SamplerConfig = cfg.sampler
        init_probs = torch.empty((height, width), dtype=dtype).uniform_(
            INIT_PROB_LOW, INIT_PROB_HIGH, generator=generator
        )
        self.mask_weights = nn.Parameter(prob_to_weights(init_probs, self.sampler.weight_slope))
        self.net: ReconUNet = init_params(cfg.net, generator, dtype)

    def probability(self) -> Tensor:
        return weights_to_prob(self.mask_weights, self.sampler.weight_slope)

    def reconstruction_error(self, images: Tensor, u: Tensor) -> Tensor:
        """
        Mean absolute reconstruction error over all images and mask samples.

        Args:
            images: (B, H, W) ground truth
            u: (K, B, H, W) uniform fields

        Returns:
            Scalar mean |A(F^H diag(soft) F x) - x|
        """
        soft = relaxed_threshold(u, self.probability(), self.sampler.threshold_slope)
        stacked = images.unsqueeze(0).expand_as(soft)
        aliased = undersampled_recon(stacked, soft)
        k, b, h, w = aliased.shape
        recon = self.net(aliased.reshape(k * b, h, w))
        return (recon - stacked.reshape(k * b, h, w)).abs().mean()

    def objective(self, images: Tensor, generator: torch.Generator, cfg: TrainingConfig) -> Tensor:
        """λ · mean(p) + reconstruction error with K fresh uniform fields per image"""
        h, w = images.shape[-2:]
        u = sample_uniform_field(generator, h, w, batch=(cfg.mc_samples, images.shape[0]), dtype=images.dtype)
        return cfg.lambda_ * expected_sparsity(self.probability()) + self.reconstruction_error(images, u)

    def expected_sparsity(self) -> float:
        return float(expected_sparsity(self.probability()).item())


class FixedMaskModel(nn.Module):
    """Network trained behind a constant hard binary mask"""

    def __init__(self, mask: Tensor, cfg: TrainingConfig, generator: torch.Generator, dtype: torch.dtype):
        super().__init__()
        self.register_buffer("mask", mask.detach().to(dtype))
        self.net: ReconUNet = init_params(cfg.net, generator, dtype)

    def objective(self, images: Tensor, generator: Optional[torch.Generator], cfg: TrainingConfig) -> Tensor:
        aliased = undersampled_recon(images, self.mask)
        return (self.net(aliased) - images).abs().mean()

    def expected_sparsity(self) -> float:
        return float(self.mask.mean().item())


def check_batch(images: Tensor, height: int, width: int) -> None:
    """Reject empty batches and batches whose grid differs from the model's."""
    if images.dim() != 3 or images.shape[0] == 0:
        raise ShapeMismatchError(f"batch must be a nonempty (B, H, W) stack, got {tuple(images.shape)}")
    if tuple(images.shape[-2:]) != (height, width):
        raise ShapeMismatchError(f"batch grid {tuple(images.shape[-2:])} does not match model grid {(height, width)}")


def loupe_loss(
    model: LoupeModel,
    images: Tensor,
    cfg: TrainingConfig,
    generator: torch.Generator,
) -> Tuple[float, Dict[str, Tensor]]:
    """
    LOUPE loss and its exact gradients through sigmoid → soft mask → masking →
    inverse DFT → network → L1.

    Args:
        model: Joint mask/network model
        images: (B, H, W) batch of ground-truth images
        cfg: Training config (λ, K, slopes)
        generator: Source of the uniform fields

    Returns:
        (loss value, gradients keyed by parameter name)

    Raises:
        ShapeMismatchError: For an empty or mis-sized batch
        DivergenceError: If the loss is not finite
    """
    check_batch(images, *model.mask_weights.shape)
    loss = model.objective(images, generator, cfg)
    value = float(loss.item())
    if not math.isfinite(value):
        raise DivergenceError(f"non-finite loss {value}")

    named = list(model.named_parameters())
    grads = torch.autograd.grad(loss, [p for _, p in named], allow_unused=True)
    return value, {
        name: (g if g is not None else torch.zeros_like(p))
        for (name, p), g in zip(named, grads)
    }
