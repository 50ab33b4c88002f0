"""
Anti-aliasing Network
Residual U-Net mapping a complex aliased image (as real/imag channels) to a real image.
"""
from typing import Dict, List, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F
from torch import Tensor

from app.schemas.config import NetworkConfig
from app.services.kspace import magnitude

INPUT_CHANNELS = 2
BN_MOMENTUM = 0.01  # running statistics decay 0.99
BN_EPS = 1e-5


class NetworkShapeError(ValueError):
    """Raised when the input grid is not divisible by 2^(depth-1)"""
    pass


class ConvBlock(nn.Sequential):
    """3×3 zero-padded convolution, leaky ReLU, then batch norm"""

    def __init__(self, in_channels: int, out_channels: int, leaky_slope: float):
        super().__init__(
            nn.Conv2d(in_channels, out_channels, kernel_size=3, padding=1),
            nn.LeakyReLU(leaky_slope),
            nn.BatchNorm2d(out_channels, momentum=BN_MOMENTUM, eps=BN_EPS),
        )


def _double_block(in_channels: int, out_channels: int, leaky_slope: float) -> nn.Sequential:
    return nn.Sequential(
        ConvBlock(in_channels, out_channels, leaky_slope),
        ConvBlock(out_channels, out_channels, leaky_slope),
    )


class ReconUNet(nn.Module):
    """
    U-Net with max-pool down-sampling, nearest-neighbour up-sampling and
    concatenation skips. The 1×1 head predicts a residual that is added to the
    magnitude of the aliased input.
    """

    def __init__(self, cfg: NetworkConfig):
        super().__init__()
        self.cfg = cfg
        widths = [cfg.base_channels * 2 ** level for level in range(cfg.depth)]

        self.encoders = nn.ModuleList()
        in_channels = INPUT_CHANNELS
        for width in widths:
            self.encoders.append(_double_block(in_channels, width, cfg.leaky_slope))
            in_channels = width

        self.decoders = nn.ModuleList()
        for width in reversed(widths[:-1]):
            self.decoders.append(_double_block(in_channels + width, width, cfg.leaky_slope))
            in_channels = width

        self.head = nn.Conv2d(in_channels, 1, kernel_size=1)

    def check_grid(self, height: int, width: int) -> None:
        divisor = self.cfg.divisor
        if height % divisor or width % divisor:
            raise NetworkShapeError(
                f"grid {height}x{width} is not divisible by {divisor} (depth {self.cfg.depth})"
            )

    def forward_channels(self, channels: Tensor) -> Tensor:
        """
        Run the network on an explicit (B, 2, H, W) real/imag stack.

        Args:
            channels: Real tensor (B, 2, H, W)

        Returns:
            Real reconstruction (B, H, W)
        """
        self.check_grid(channels.shape[-2], channels.shape[-1])

        skips: List[Tensor] = []
        x = channels
        for level, encoder in enumerate(self.encoders):
            x = encoder(x)
            if level < len(self.encoders) - 1:
                skips.append(x)
                x = F.max_pool2d(x, 2)

        for decoder in self.decoders:
            x = F.interpolate(x, scale_factor=2, mode="nearest")
            x = decoder(torch.cat([x, skips.pop()], dim=1))

        residual = self.head(x)[:, 0]
        base = magnitude(torch.complex(channels[:, 0], channels[:, 1]))
        return residual + base

    def forward(self, aliased: Tensor) -> Tensor:
        """
        Args:
            aliased: Complex aliased image (B, H, W) or (H, W)

        Returns:
            Real reconstruction with the same leading shape
        """
        squeeze = aliased.dim() == 2
        if squeeze:
            aliased = aliased.unsqueeze(0)
        out = self.forward_channels(to_channels(aliased))
        return out[0] if squeeze else out


def to_channels(aliased: Tensor) -> Tensor:
    """Stack a complex (B, H, W) tensor into real (B, 2, H, W) channels."""
    return torch.stack([aliased.real, aliased.imag], dim=1)


def init_params(cfg: NetworkConfig, generator: torch.Generator, dtype: torch.dtype = torch.float32) -> ReconUNet:
    """
    Build a network with rectifier-aware initialisation.

    Kernels ~ N(0, 2 / fan_in), biases 0, batch-norm scale 1 / shift 0,
    running mean 0 / variance 1.

    Args:
        cfg: Network shape
        generator: Seeded torch generator
        dtype: Parameter dtype

    Returns:
        Freshly initialised ReconUNet in training mode
    """
    net = ReconUNet(cfg).to(dtype)
    with torch.no_grad():
        for module in net.modules():
            if isinstance(module, nn.Conv2d):
                fan_in = module.in_channels * module.kernel_size[0] * module.kernel_size[1]
                module.weight.normal_(0.0, (2.0 / fan_in) ** 0.5, generator=generator)
                module.bias.zero_()
            elif isinstance(module, nn.BatchNorm2d):
                module.reset_parameters()
    net.train()
    return net


def count_parameters(net: nn.Module) -> int:
    """Number of trainable scalars (kernels, biases, batch-norm scale/shift)."""
    return sum(p.numel() for p in net.parameters())


def zero_head(net: ReconUNet) -> None:
    """Zero the final 1×1 layer so the network reduces to the input magnitude."""
    with torch.no_grad():
        net.head.weight.zero_()
        net.head.bias.zero_()


def forward_backward(
    net: ReconUNet,
    aliased: Tensor,
    upstream_grad: Tensor,
) -> Tuple[Dict[str, Tensor], Tensor]:
    """
    Exact gradients of <upstream_grad, net(aliased)> in the network's current mode.

    Args:
        net: Network (training mode uses batch statistics)
        aliased: Complex aliased image (B, H, W)
        upstream_grad: Real gradient w.r.t. the output (B, H, W)

    Returns:
        (parameter gradients by name, input gradient (B, 2, H, W) for the real/imag channels)
    """
    channels = to_channels(aliased.detach()).requires_grad_(True)
    output = net.forward_channels(channels)
    named = list(net.named_parameters())
    grads = torch.autograd.grad(
        output,
        [p for _, p in named] + [channels],
        grad_outputs=upstream_grad.to(output.dtype),
        allow_unused=True,
    )
    param_grads = {
        name: (g if g is not None else torch.zeros_like(p))
        for (name, p), g in zip(named, grads[:-1])
    }
    return param_grads, grads[-1]
