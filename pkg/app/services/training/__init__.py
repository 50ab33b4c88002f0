from app.services.training.objective import (
    DivergenceError,
    LoupeModel,
    FixedMaskModel,
    loupe_loss,
)
from app.services.training.optimizer import TrainState, adam_step, build_optimizer, new_state
from app.services.training.trainer import (
    TrainingResult,
    EarlyStopping,
    validation_loss,
    train_loupe,
    train_fixed_mask,
    write_history_csv,
)
from app.services.training.calibration import (
    CalibrationError,
    search_lambda,
    calibrate_lambda,
    count_monotonicity_violations,
)

__all__ = [
    "DivergenceError",
    "LoupeModel",
    "FixedMaskModel",
    "loupe_loss",
    "TrainState",
    "adam_step",
    "build_optimizer",
    "new_state",
    "TrainingResult",
    "EarlyStopping",
    "validation_loss",
    "train_loupe",
    "train_fixed_mask",
    "write_history_csv",
    "CalibrationError",
    "search_lambda",
    "calibrate_lambda",
    "count_monotonicity_violations",
]
