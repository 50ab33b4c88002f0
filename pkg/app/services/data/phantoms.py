"""
Synthetic Phantoms
Piecewise-smooth ellipse phantoms standing in for brain MRI slices.
"""
import logging
from typing import Tuple

import numpy as np
from scipy.ndimage import uniform_filter

from app.schemas.dataset import Dataset

logger = logging.getLogger(__name__)

GENERATOR_NAME = "ellipse-phantom-v1"
MIN_SIDE = 16
MIN_INNER, MAX_INNER = 4, 9
INTENSITY_RANGE = (0.2, 1.0)
SKULL_AXES = (0.72, 0.92)
SKULL_INTENSITY = (0.2, 0.5)
INNER_AXES = (0.08, 0.4)
BLUR_SIZE = 3


def _grid(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    ys = (np.arange(height) - (height - 1) / 2.0) / (height / 2.0)
    xs = (np.arange(width) - (width - 1) / 2.0) / (width / 2.0)
    return np.meshgrid(ys, xs, indexing="ij")


def ellipse(yy: np.ndarray, xx: np.ndarray, centre: Tuple[float, float], axes: Tuple[float, float], angle: float) -> np.ndarray:
    """Indicator of a rotated ellipse on normalised coordinates."""
    dy, dx = yy - centre[0], xx - centre[1]
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    u = dx * cos_a + dy * sin_a
    v = -dx * sin_a + dy * cos_a
    return ((u / axes[1]) ** 2 + (v / axes[0]) ** 2 <= 1.0).astype(np.float64)


def phantom(height: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """
    One phantom: an enclosing "skull" ellipse plus 4–9 random inner ellipses,
    3×3 box-blurred and rescaled to [0, 1] with maximum exactly 1.

    Args:
        height: Image height
        width: Image width
        rng: Numpy generator

    Returns:
        float32 array (H, W)
    """
    yy, xx = _grid(height, width)
    skull_axes = tuple(rng.uniform(*SKULL_AXES, size=2))
    skull_centre = tuple(rng.uniform(-0.04, 0.04, size=2))
    img = rng.uniform(*SKULL_INTENSITY) * ellipse(yy, xx, skull_centre, skull_axes, rng.uniform(0, np.pi))

    for _ in range(rng.integers(MIN_INNER, MAX_INNER + 1)):
        radius = 0.55 * np.sqrt(rng.uniform())
        theta = rng.uniform(0, 2 * np.pi)
        centre = (
            skull_centre[0] + radius * skull_axes[0] * np.sin(theta),
            skull_centre[1] + radius * skull_axes[1] * np.cos(theta),
        )
        axes = tuple(rng.uniform(*INNER_AXES, size=2))
        img += rng.uniform(*INTENSITY_RANGE) * ellipse(yy, xx, centre, axes, rng.uniform(0, np.pi))

    img = uniform_filter(img, size=BLUR_SIZE, mode="constant")
    img -= img.min()
    img /= img.max()
    return img.astype(np.float32)


def generate_phantoms(n: int, height: int, width: int, seed: int) -> Dataset:
    """
    Deterministic phantom dataset; image i uses its own generator seeded by (seed, i).

    Args:
        n: Number of images (>= 1)
        height: Image height (>= 16)
        width: Image width (>= 16)
        seed: Dataset seed

    Returns:
        Dataset of n images in [0, 1]
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if height < MIN_SIDE or width < MIN_SIDE:
        raise ValueError(f"phantoms need at least {MIN_SIDE}x{MIN_SIDE} pixels, got {height}x{width}")

    images = np.stack([
        phantom(height, width, np.random.default_rng([seed, index]))
        for index in range(n)
    ])
    # float32 rounding can leave the peak a hair off 1
    images /= images.reshape(n, -1).max(axis=1)[:, None, None]
    images = np.clip(images, 0.0, 1.0)
    logger.info("generated %d phantoms of %dx%d (seed %d)", n, height, width, seed)
    return Dataset(images=images, generator=GENERATOR_NAME, seed=seed)
