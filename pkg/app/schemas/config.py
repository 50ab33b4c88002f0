"""
Run Configuration Schemas
Pydantic models for the JSON experiment config (see docs/CONFIG_SCHEMA.md).
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator


MaskKind = Literal["uniform", "vardens", "cartesian"]


class ConfigError(Exception):
    """Raised when a run config cannot be read or fails validation"""
    pass


class StrictModel(BaseModel):
    """Base for config blocks: unknown keys are rejected"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class SamplerConfig(StrictModel):
    """Slopes of the weights→probability sigmoid and of the relaxed threshold"""
    weight_slope: float = Field(5.0, gt=0, description="Slope t of sigmoid(t * w)")
    threshold_slope: float = Field(200.0, gt=0, description="Slope s of sigmoid(s * (p - u))")
    seed: int = Field(0, description="Seed for the training-time uniform fields")


class NetworkConfig(StrictModel):
    """Residual U-Net shape"""
    depth: int = Field(3, ge=1, description="Number of resolution levels")
    base_channels: int = Field(16, ge=1, description="Channels at the finest level")
    leaky_slope: float = Field(0.2, gt=0, lt=1, description="Negative slope of the leaky ReLU")
    kernel_size: Literal[3] = 3

    @property
    def divisor(self) -> int:
        """Input height and width must be multiples of this value"""
        return 2 ** (self.depth - 1)


class TrainingConfig(StrictModel):
    """Optimisation hyper-parameters shared by LOUPE and fixed-mask training"""
    lambda_: float = Field(0.05, ge=0, alias="lambda", description="Sparsity weight")
    mc_samples: int = Field(1, ge=1, alias="K", description="Monte-Carlo mask samples per image")
    batch_size: int = Field(32, ge=1)
    learning_rate: float = Field(1e-3, ge=0)
    adam_beta1: float = Field(0.9, gt=0, lt=1)
    adam_beta2: float = Field(0.999, gt=0, lt=1)
    adam_epsilon: float = Field(1e-8, gt=0)
    max_epochs: int = Field(40, ge=1)
    patience: int = Field(10, ge=1)
    min_delta: float = Field(1e-5, ge=0, description="Minimum validation improvement")
    seed: int = 0
    val_seed: int = Field(1234, description="Seed for validation uniform fields")
    dtype: Literal["float32", "float64"] = "float32"
    target_rate: float = Field(0.25, gt=0, lt=1)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    net: NetworkConfig = Field(default_factory=NetworkConfig)

    @model_validator(mode="after")
    def check_betas(self) -> "TrainingConfig":
        if not self.adam_beta1 < self.adam_beta2:
            raise ValueError("adam_beta1 must be smaller than adam_beta2")
        return self


class CalibrationConfig(StrictModel):
    """Bracketed λ search settings"""
    probe_epochs: int = Field(5, ge=1)
    tolerance: float = Field(0.02, gt=0)
    lambda_min: float = Field(1e-4, gt=0)
    lambda_max: float = Field(1e2, gt=0)
    grid_points: int = Field(7, ge=2)
    max_bisections: int = Field(8, ge=0)
    monotone_tolerance: float = Field(0.01, ge=0)
    subset_size: Optional[int] = Field(128, ge=1, description="Cap on images per probe run; null uses all")

    @model_validator(mode="after")
    def check_range(self) -> "CalibrationConfig":
        if not self.lambda_min < self.lambda_max:
            raise ValueError("lambda_min must be smaller than lambda_max")
        return self


class SyntheticDataConfig(StrictModel):
    """Phantom set generated in memory when no dataset file is given"""
    n: int = Field(512, ge=1)
    height: int = Field(64, ge=16)
    width: int = Field(64, ge=16)
    seed: int = 7


class DataConfig(StrictModel):
    """Dataset source and split"""
    path: Optional[str] = Field(None, description="LPTD file; null means synthesize")
    synthetic: SyntheticDataConfig = Field(default_factory=SyntheticDataConfig)
    split: Tuple[float, float, float] = (0.7, 0.15, 0.15)
    split_seed: int = 0

    @field_validator("split")
    @classmethod
    def check_split(cls, v: Tuple[float, float, float]) -> Tuple[float, float, float]:
        if any(f <= 0 for f in v):
            raise ValueError("split fractions must be positive")
        if abs(sum(v) - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")
        return v


class MaskConfig(StrictModel):
    """Benchmark mask settings"""
    kinds: List[MaskKind] = Field(default_factory=lambda: ["uniform", "vardens", "cartesian"])
    calib_size: Optional[int] = Field(None, ge=0, description="Side of the calibration block; null scales 32 at 256")
    vd_sigma_fraction: float = Field(0.15, gt=0, description="Gaussian width as a fraction of min(H, W)")
    seed: int = 0

    def resolved_calib(self, height: int, width: int) -> int:
        """Calibration side length for an H×W grid"""
        if self.calib_size is not None:
            return self.calib_size
        return int(round(32 * min(height, width) / 256))


class EvaluationConfig(StrictModel):
    """Test-time settings"""
    seed: int = 0
    realization: Literal["topk", "sample"] = "topk"


class RunConfig(StrictModel):
    """Complete experiment configuration"""
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    masks: MaskConfig = Field(default_factory=MaskConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    output_dir: str = "runs/default"


def load_run_config(path: Optional[Union[str, Path]]) -> RunConfig:
    """
    Load and validate a run config; a missing path yields all defaults.

    Args:
        path: JSON config file or None

    Returns:
        Fully resolved RunConfig

    Raises:
        ConfigError: If the file is unreadable, not JSON, or fails validation
    """
    if path is None:
        return RunConfig()

    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}")

    try:
        return RunConfig.model_validate_json(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {path}:\n{e}")


def dump_run_config(config: RunConfig, path: Union[str, Path]) -> None:
    """
    Write the fully resolved config (JSON aliases, all defaults filled).

    Args:
        config: Config to echo
        path: Destination file
    """
    payload = config.model_dump(mode="json", by_alias=True)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
