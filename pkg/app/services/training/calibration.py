"""
Sparsity Weight Calibration
Bracketed search over λ (geometric grid, then bisection on log λ) so that a short
LOUPE run lands on the requested expected sparsity.
"""
import logging
import math
from typing import Callable, List, Optional

import numpy as np

from app.schemas.config import CalibrationConfig, TrainingConfig
from app.schemas.dataset import Dataset
from app.schemas.metrics import CalibrationProbe, CalibrationResult
from app.services.training.trainer import train_loupe

logger = logging.getLogger(__name__)

ProbeFn = Callable[[float], CalibrationProbe]


class CalibrationError(RuntimeError):
    """Raised when no λ in the search range brackets the target sparsity"""

    def __init__(self, message: str, low_end: float, high_end: float, probes: Optional[List[CalibrationProbe]] = None):
        super().__init__(message)
        self.low_end = low_end
        self.high_end = high_end
        self.probes = probes or []


def count_monotonicity_violations(probes: List[CalibrationProbe], tolerance: float) -> int:
    """
    Count adjacent probes (sorted by λ) whose sparsity rises by more than tolerance.

    Args:
        probes: Probe log
        tolerance: Allowed noise between neighbours

    Returns:
        Number of violating neighbour pairs
    """
    ordered = sorted(probes, key=lambda p: p.lambda_value)
    return sum(
        1 for a, b in zip(ordered, ordered[1:])
        if b.expected_sparsity > a.expected_sparsity + tolerance
    )


def search_lambda(target_rate: float, probe: ProbeFn, calib: CalibrationConfig) -> CalibrationResult:
    """
    Find λ whose probe sparsity lies within calib.tolerance of target_rate.

    Sparsity is assumed non-increasing in λ; violations are counted and logged.

    Args:
        target_rate: Desired expected sparsity in (0, 1)
        probe: Callable running one short training at a given λ
        calib: Search settings

    Returns:
        CalibrationResult with the chosen λ and the full probe log

    Raises:
        CalibrationError: If the grid does not bracket the target or bisection fails
    """
    if not 0 < target_rate < 1:
        raise ValueError(f"target_rate must be in (0, 1), got {target_rate}")

    probes: List[CalibrationProbe] = []

    def run(lam: float) -> CalibrationProbe:
        result = probe(lam)
        probes.append(result)
        logger.info("λ=%.4g → expected sparsity %.4f", lam, result.expected_sparsity)
        return result

    def finish(best: CalibrationProbe) -> CalibrationResult:
        violations = count_monotonicity_violations(probes, calib.monotone_tolerance)
        if violations:
            logger.warning("sparsity rose with λ at %d neighbouring probes", violations)
        return CalibrationResult(
            lambda_value=best.lambda_value,
            target_rate=target_rate,
            achieved_sparsity=best.expected_sparsity,
            probes=sorted(probes, key=lambda p: p.lambda_value),
            monotonicity_violations=violations,
        )

    grid = np.geomspace(calib.lambda_min, calib.lambda_max, calib.grid_points)
    grid_probes = [run(float(lam)) for lam in grid]

    hits = [p for p in grid_probes if abs(p.expected_sparsity - target_rate) <= calib.tolerance]
    if hits:
        return finish(min(hits, key=lambda p: abs(p.expected_sparsity - target_rate)))

    bracket = None
    for low, high in zip(grid_probes, grid_probes[1:]):
        if low.expected_sparsity >= target_rate >= high.expected_sparsity:
            bracket = (low.lambda_value, high.lambda_value)
            break

    if bracket is None:
        low_end = grid_probes[0].expected_sparsity
        high_end = grid_probes[-1].expected_sparsity
        raise CalibrationError(
            f"λ in [{calib.lambda_min:g}, {calib.lambda_max:g}] does not bracket sparsity {target_rate}: "
            f"achieved {low_end:.4f} at λ_min and {high_end:.4f} at λ_max",
            low_end, high_end, probes,
        )

    lo, hi = bracket
    for _ in range(calib.max_bisections):
        mid = math.sqrt(lo * hi)
        result = run(mid)
        if abs(result.expected_sparsity - target_rate) <= calib.tolerance:
            return finish(result)
        if result.expected_sparsity > target_rate:
            lo = mid
        else:
            hi = mid

    raise CalibrationError(
        f"bisection between λ={bracket[0]:g} and λ={bracket[1]:g} did not reach sparsity {target_rate} "
        f"within {calib.tolerance}",
        grid_probes[0].expected_sparsity, grid_probes[-1].expected_sparsity, probes,
    )


def probe_config(cfg: TrainingConfig, lambda_value: float, epochs: int) -> TrainingConfig:
    """Copy of cfg for a short probe run at a fixed λ without early stopping."""
    return cfg.model_copy(update={
        "lambda_": lambda_value,
        "max_epochs": epochs,
        "patience": epochs,
    })


def run_probe(
    lambda_value: float,
    cfg: TrainingConfig,
    train_subset: Dataset,
    val_subset: Dataset,
    epochs: int,
) -> CalibrationProbe:
    """
    Short LOUPE run at a fixed λ.

    Reports the expected sparsity and validation loss of the returned
    (best-validation) model, not of the last epoch.
    """
    result = train_loupe(train_subset, val_subset, probe_config(cfg, lambda_value, epochs))
    return CalibrationProbe(
        lambda_value=lambda_value,
        expected_sparsity=result.model.expected_sparsity(),
        val_loss=result.state.best_val_loss,
    )


def calibrate_lambda(
    target_rate: float,
    cfg: TrainingConfig,
    train_subset: Dataset,
    val_subset: Dataset,
    calib: Optional[CalibrationConfig] = None,
) -> CalibrationResult:
    """
    Choose λ empirically so that LOUPE reaches target_rate.

    Args:
        target_rate: Desired expected sparsity in (0, 1)
        cfg: Training config used for every probe (λ overridden)
        train_subset: Training images for the probes
        val_subset: Validation images for the probes
        calib: Search settings; defaults if omitted

    Returns:
        CalibrationResult

    Raises:
        CalibrationError: If the target is not bracketed in [lambda_min, lambda_max]
    """
    calib = calib or CalibrationConfig()
    if calib.subset_size is not None:
        train_subset = train_subset.subset(range(min(len(train_subset), calib.subset_size)))
        val_subset = val_subset.subset(range(min(len(val_subset), calib.subset_size)))

    def probe(lam: float) -> CalibrationProbe:
        return run_probe(lam, cfg, train_subset, val_subset, calib.probe_epochs)

    return search_lambda(target_rate, probe, calib)
