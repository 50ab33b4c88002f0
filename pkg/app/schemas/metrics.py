"""
Metrics Schemas
Pydantic models for per-image evaluation records, summaries and training history.
"""
import math
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator


class MetricsRecord(BaseModel):
    """PSNR of one reconstruction of one test image"""
    method: str = Field(..., description="Reconstruction method, e.g. zero_filled or unet")
    mask: str = Field(..., description="Mask name, e.g. uniform or optimized")
    image_index: int = Field(..., ge=0)
    psnr_db: float = Field(..., description="PSNR in dB; +inf marks an exact reconstruction")
    sparsity: float = Field(..., ge=0, le=1)
    seed: int

    @field_validator("psnr_db")
    @classmethod
    def reject_nan(cls, v: float) -> float:
        if math.isnan(v):
            raise ValueError("psnr_db must not be NaN")
        return v


class SummaryRow(BaseModel):
    """Descriptive PSNR statistics for one (method, mask) group"""
    method: str
    mask: str
    n: int = Field(..., ge=1)
    mean_db: float
    median_db: float
    std_db: float = Field(..., description="Population std over the finite values only")
    n_exact: int = Field(0, ge=0, description="Exact reconstructions (PSNR +inf) in the group")


class PairedDifference(BaseModel):
    """Paired mean PSNR difference of a group against a baseline group"""
    method: str
    mask: str
    baseline_method: str
    baseline_mask: str
    n: int = Field(..., ge=1)
    mean_diff_db: float
    stderr_db: float


class EpochRecord(BaseModel):
    """One row of the training history"""
    epoch: int = Field(..., ge=1)
    train_loss: float
    val_loss: float
    expected_sparsity: float = Field(..., ge=0, le=1)
    wall_seconds: float = Field(..., ge=0)


class TrainingHistory(BaseModel):
    """Per-epoch history plus the validation loss before any update"""
    initial_val_loss: Optional[float] = None
    best_epoch: int = 0
    stopped_early: bool = False
    epochs: List[EpochRecord] = Field(default_factory=list)

    def __len__(self) -> int:
        return len(self.epochs)


class CalibrationProbe(BaseModel):
    """Outcome of one short training run at a fixed λ"""
    lambda_value: float = Field(..., gt=0)
    expected_sparsity: float = Field(..., ge=0, le=1)
    val_loss: float


class CalibrationResult(BaseModel):
    """Selected λ and the probe log that led to it"""
    lambda_value: float = Field(..., gt=0)
    target_rate: float
    achieved_sparsity: float
    probes: List[CalibrationProbe] = Field(default_factory=list)
    monotonicity_violations: int = 0
