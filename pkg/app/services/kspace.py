"""
K-space Operators
Unitary 2D DFT with DC-centred k-space, masking, and the under-sampled forward model.

Spatial images use natural indexing (origin at [0, 0]); k-space arrays hold the
DC coefficient at [H // 2, W // 2]. Both transforms carry 1/sqrt(H*W), so idft2
is exactly the Hermitian transpose of dft2. All functions act on the last two
dimensions and broadcast over any leading batch dimensions.
"""
import torch
from torch import Tensor

SPATIAL_DIMS = (-2, -1)


class ShapeMismatchError(ValueError):
    """Raised when two grids that must share H×W do not"""
    pass


def check_same_grid(a: Tensor, b: Tensor, what: str = "inputs") -> None:
    """
    Ensure the trailing H×W dimensions of two tensors agree.

    Args:
        a: First tensor (..., H, W)
        b: Second tensor (..., H, W)
        what: Label used in the error message

    Raises:
        ShapeMismatchError: If the grids differ
    """
    if a.dim() < 2 or b.dim() < 2 or a.shape[-2:] != b.shape[-2:]:
        raise ShapeMismatchError(
            f"{what} grid mismatch: {tuple(a.shape[-2:])} vs {tuple(b.shape[-2:])}"
        )


def to_complex(x: Tensor) -> Tensor:
    """Promote a real image to the matching complex dtype; complex input passes through."""
    if x.is_complex():
        return x
    return torch.complex(x, torch.zeros_like(x))


def magnitude(z: Tensor) -> Tensor:
    """Elementwise modulus; the gradient at zero is defined as zero."""
    return z.abs()


def dft2(img: Tensor) -> Tensor:
    """
    Unitary forward 2D DFT returning DC-centred k-space.

    Args:
        img: Spatial image (..., H, W), real or complex

    Returns:
        Complex k-space (..., H, W)
    """
    ksp = torch.fft.fft2(to_complex(img), dim=SPATIAL_DIMS, norm="ortho")
    return torch.fft.fftshift(ksp, dim=SPATIAL_DIMS)


def idft2(ksp: Tensor) -> Tensor:
    """
    Unitary inverse 2D DFT of DC-centred k-space.

    Args:
        ksp: Complex k-space (..., H, W)

    Returns:
        Complex spatial image (..., H, W)
    """
    unshifted = torch.fft.ifftshift(to_complex(ksp), dim=SPATIAL_DIMS)
    return torch.fft.ifft2(unshifted, dim=SPATIAL_DIMS, norm="ortho")


def apply_mask(ksp: Tensor, mask: Tensor) -> Tensor:
    """
    Multiply k-space by a (possibly soft) real mask.

    Args:
        ksp: Complex k-space (..., H, W)
        mask: Real mask (..., H, W) with entries in [0, 1]

    Returns:
        Masked k-space

    Raises:
        ShapeMismatchError: If the grids differ
    """
    check_same_grid(ksp, mask, "k-space/mask")
    return ksp * mask.to(ksp.real.dtype)


def undersampled_recon(x: Tensor, mask: Tensor) -> Tensor:
    """
    Aliased (zero-filled) reconstruction F^H diag(mask) F x.

    Args:
        x: Real spatial image (..., H, W)
        mask: Real mask (..., H, W)

    Returns:
        Complex aliased image (..., H, W)

    Raises:
        ShapeMismatchError: If the grids differ
    """
    check_same_grid(x, mask, "image/mask")
    return idft2(apply_mask(dft2(x), mask))
