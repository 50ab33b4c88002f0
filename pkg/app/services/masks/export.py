"""
PGM Export
8-bit binary PGM (P5) read/write for masks, probability maps and images.
"""
from pathlib import Path
from typing import Union

import numpy as np
import torch
from PIL import Image
from torch import Tensor

PathLike = Union[str, Path]


def to_gray_levels(values: Union[Tensor, np.ndarray]) -> np.ndarray:
    """
    Map values in [0, 1] to uint8 levels round(255 * v).

    Args:
        values: (H, W) array or tensor

    Returns:
        uint8 array (H, W)
    """
    if isinstance(values, Tensor):
        values = values.detach().cpu().to(torch.float64).numpy()
    levels = np.rint(255.0 * np.clip(np.asarray(values, dtype=np.float64), 0.0, 1.0))
    return levels.astype(np.uint8)


def write_pgm(values: Union[Tensor, np.ndarray], path: PathLike) -> Path:
    """
    Write a single-channel P5 PGM; binary masks become 0/255.

    Args:
        values: (H, W) values in [0, 1]
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_gray_levels(values)).save(path, format="PPM")
    return path


def read_pgm(path: PathLike) -> np.ndarray:
    """
    Read a PGM as float64 values in [0, 1].

    Args:
        path: PGM file

    Returns:
        Array (H, W)
    """
    with Image.open(path) as img:
        levels = np.asarray(img.convert("L"), dtype=np.float64)
    return levels / 255.0


def read_mask_pgm(path: PathLike) -> Tensor:
    """Read a PGM mask, treating levels >= 128 as sampled."""
    return torch.from_numpy((read_pgm(path) >= 0.5).astype(np.float64))
