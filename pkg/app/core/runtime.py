"""
Torch Runtime Setup
Thread cap and determinism switches applied once per process.
"""
import logging

import torch

from app.core.config import settings

logger = logging.getLogger(__name__)


def configure_torch() -> None:
    """Apply LOUPE_THREADS and deterministic-algorithm settings to torch."""
    if settings.threads is not None:
        torch.set_num_threads(settings.threads)
        logger.debug("torch intra-op threads capped at %d", settings.threads)

    if settings.deterministic:
        torch.use_deterministic_algorithms(True, warn_only=True)


def resolve_dtype(name: str) -> torch.dtype:
    """
    Map a config dtype name to a torch dtype.

    Args:
        name: "float32" or "float64"

    Returns:
        Matching torch dtype
    """
    if name == "float64":
        return torch.float64
    if name == "float32":
        return torch.float32
    raise ValueError(f"Unsupported dtype: {name}")
