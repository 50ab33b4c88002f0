"""
Benchmark Masks
Uniform random, Gaussian variable-density and equispaced Cartesian masks with an
optional fully sampled calibration block at the k-space centre.
"""
import logging
from typing import Optional, Tuple

import numpy as np
import torch
from torch import Tensor

logger = logging.getLogger(__name__)

BISECTION_ITERATIONS = 200
VD_TOLERANCE = 1e-4


class InfeasibleBudgetError(ValueError):
    """Raised when a sampling rate cannot be met with the requested calibration block"""
    pass


def calibration_slices(height: int, width: int, calib: int) -> Tuple[slice, slice]:
    """
    Row and column slices of the calib×calib block centred on the DC point.

    Args:
        height: Grid height
        width: Grid width
        calib: Block side (0 for none)

    Returns:
        (row_slice, col_slice)
    """
    top = height // 2 - calib // 2
    left = width // 2 - calib // 2
    return slice(top, top + calib), slice(left, left + calib)


def calibration_region(height: int, width: int, calib: int) -> np.ndarray:
    """Boolean H×W array that is True inside the calibration block."""
    if calib < 0 or calib > min(height, width):
        raise InfeasibleBudgetError(f"calibration size {calib} does not fit a {height}x{width} grid")
    region = np.zeros((height, width), dtype=bool)
    if calib > 0:
        rows, cols = calibration_slices(height, width, calib)
        region[rows, cols] = True
    return region


def _check_budget(height: int, width: int, rate: float, calib: int) -> np.ndarray:
    if not 0 < rate < 1:
        raise InfeasibleBudgetError(f"rate must be in (0, 1), got {rate}")
    region = calibration_region(height, width, calib)
    if region.sum() > rate * height * width:
        raise InfeasibleBudgetError(
            f"calibration block {calib}x{calib} exceeds the budget of rate {rate} "
            f"on a {height}x{width} grid"
        )
    return region


def _as_tensor(mask: np.ndarray) -> Tensor:
    return torch.from_numpy(mask.astype(np.float64))


def uniform_probability(height: int, width: int, rate: float, calib: int = 0) -> np.ndarray:
    """
    Per-point Bernoulli probabilities of the uniform mask.

    The off-calibration probability is lowered so the expected sparsity,
    calibration block included, equals rate.
    """
    region = _check_budget(height, width, rate, calib)
    n_calib = int(region.sum())
    n_total = height * width
    off_prob = (rate * n_total - n_calib) / (n_total - n_calib)
    probs = np.full((height, width), off_prob, dtype=np.float64)
    probs[region] = 1.0
    return probs


def uniform_mask(
    height: int,
    width: int,
    rate: float,
    calib: int = 0,
    rng: Optional[np.random.Generator] = None,
) -> Tensor:
    """
    Uniform random mask with expected sparsity rate.

    Args:
        height: Grid height
        width: Grid width
        rate: Target sparsity in (0, 1)
        calib: Calibration block side (0 for none)
        rng: Numpy generator; a fresh unseeded one if omitted

    Returns:
        Binary float64 mask (H, W)

    Raises:
        InfeasibleBudgetError: If rate is outside (0, 1) or below the calibration fraction
    """
    rng = rng if rng is not None else np.random.default_rng()
    probs = uniform_probability(height, width, rate, calib)
    return _as_tensor(rng.random((height, width)) < probs)


def _gaussian_profile(height: int, width: int, sigma: float) -> np.ndarray:
    rows = np.arange(height, dtype=np.float64) - height // 2
    cols = np.arange(width, dtype=np.float64) - width // 2
    r2 = rows[:, None] ** 2 + cols[None, :] ** 2
    return np.exp(-r2 / (2.0 * sigma ** 2))


def variable_density_probability(
    height: int,
    width: int,
    rate: float,
    calib: int = 0,
    sigma_fraction: float = 0.15,
) -> np.ndarray:
    """
    Gaussian variable-density probabilities c * exp(-r^2 / (2 sigma^2)) clipped to [0, 1].

    The constant c is found by bisection so that the expected sparsity,
    calibration block included, matches rate.

    Args:
        height: Grid height
        width: Grid width
        rate: Target sparsity in (0, 1)
        calib: Calibration block side
        sigma_fraction: Gaussian width as a fraction of min(H, W)

    Returns:
        Probability array (H, W)
    """
    region = _check_budget(height, width, rate, calib)
    profile = _gaussian_profile(height, width, sigma_fraction * min(height, width))
    off = ~region
    n_total = height * width
    target = rate * n_total - region.sum()

    def expected_off(c: float) -> float:
        return float(np.clip(c * profile[off], 0.0, 1.0).sum())

    # Upper end: every off-calibration point certain
    c_low, c_high = 0.0, 1.0 / profile[off].min()
    for _ in range(BISECTION_ITERATIONS):
        c_mid = 0.5 * (c_low + c_high)
        if expected_off(c_mid) < target:
            c_low = c_mid
        else:
            c_high = c_mid

    c = 0.5 * (c_low + c_high)
    if abs(expected_off(c) - target) / n_total > VD_TOLERANCE:
        raise InfeasibleBudgetError(f"variable density bisection did not reach rate {rate}")
    probs = np.clip(c * profile, 0.0, 1.0)
    probs[region] = 1.0
    logger.debug("variable density constant c=%.6g for rate %.4f", c, rate)
    return probs


def variable_density_mask(
    height: int,
    width: int,
    rate: float,
    calib: int = 0,
    rng: Optional[np.random.Generator] = None,
    sigma_fraction: float = 0.15,
) -> Tensor:
    """
    Random mask drawn from the Gaussian variable-density probabilities.

    Args:
        height: Grid height
        width: Grid width
        rate: Target sparsity in (0, 1)
        calib: Calibration block side
        rng: Numpy generator
        sigma_fraction: Gaussian width as a fraction of min(H, W)

    Returns:
        Binary float64 mask (H, W)
    """
    rng = rng if rng is not None else np.random.default_rng()
    probs = variable_density_probability(height, width, rate, calib, sigma_fraction)
    return _as_tensor(rng.random((height, width)) < probs)


def cartesian_lines(height: int, stride: int) -> np.ndarray:
    """Row indices at the given stride, phase-locked to the DC row."""
    centre = height // 2
    return np.array([r for r in range(height) if (r - centre) % stride == 0], dtype=np.int64)


def cartesian_mask(height: int, width: int, rate: float, calib: int = 0) -> Tensor:
    """
    Deterministic equispaced Cartesian mask of full rows plus the calibration block.

    The stride is the one whose total sparsity is closest to rate among the
    strides that overshoot rate by at most one line.

    Args:
        height: Grid height
        width: Grid width
        rate: Target sparsity in (0, 1)
        calib: Calibration block side

    Returns:
        Binary float64 mask (H, W)
    """
    region = _check_budget(height, width, rate, calib)
    n_total = height * width
    line_width = width / n_total

    best_mask, best_gap = None, None
    for stride in range(1, height + 1):
        mask = region.copy()
        mask[cartesian_lines(height, stride), :] = True
        achieved = mask.sum() / n_total
        if achieved > rate + line_width:
            continue
        gap = abs(achieved - rate)
        if best_gap is None or gap < best_gap:
            best_mask, best_gap = mask, gap

    if best_mask is None:
        raise InfeasibleBudgetError(f"no Cartesian stride meets rate {rate} on a {height}x{width} grid")
    return _as_tensor(best_mask)


def benchmark_mask(
    kind: str,
    height: int,
    width: int,
    rate: float,
    calib: int,
    rng: np.random.Generator,
    sigma_fraction: float = 0.15,
) -> Tensor:
    """
    Dispatch to a benchmark generator by name.

    Args:
        kind: "uniform", "vardens" or "cartesian"
        height: Grid height
        width: Grid width
        rate: Target sparsity
        calib: Calibration block side
        rng: Numpy generator (unused by the Cartesian mask)
        sigma_fraction: Gaussian width for "vardens"

    Returns:
        Binary float64 mask (H, W)
    """
    if kind == "uniform":
        return uniform_mask(height, width, rate, calib, rng)
    if kind == "vardens":
        return variable_density_mask(height, width, rate, calib, rng, sigma_fraction)
    if kind == "cartesian":
        return cartesian_mask(height, width, rate, calib)
    raise ValueError(f"Unknown mask kind: {kind}")
