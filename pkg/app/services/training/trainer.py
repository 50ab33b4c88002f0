"""
Training Loops
Shuffled mini-batch ADAM training with validation-based early stopping, for the
joint LOUPE model and for networks behind a fixed benchmark mask.
"""
import csv
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np
import torch
from torch import Tensor

from app.core.runtime import resolve_dtype
from app.schemas.config import TrainingConfig
from app.schemas.dataset import Dataset
from app.schemas.metrics import EpochRecord, TrainingHistory
from app.services.training.objective import (
    DivergenceError,
    FixedMaskModel,
    LoupeModel,
    check_batch,
    loupe_loss,
)
from app.services.training.optimizer import Model, TrainState, adam_step, new_state

logger = logging.getLogger(__name__)

HISTORY_FIELDS = ["epoch", "train_loss", "val_loss", "expected_sparsity", "wall_seconds"]


@dataclass
class TrainingResult:
    """Best-validation model plus its history"""
    model: Model
    history: TrainingHistory
    state: TrainState


class EarlyStopping:
    """Tracks the best validation loss and counts epochs without improvement"""

    def __init__(self, patience: int, min_delta: float):
        self.patience = patience
        self.min_delta = min_delta
        self.best = math.inf
        self.bad_epochs = 0

    def update(self, val_loss: float) -> bool:
        """
        Record a validation loss.

        Returns:
            True if it improved on the best by at least min_delta
        """
        if val_loss <= self.best - self.min_delta:
            self.best = val_loss
            self.bad_epochs = 0
            return True
        self.bad_epochs += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.bad_epochs >= self.patience


def dataset_tensor(ds: Dataset, dtype: torch.dtype) -> Tensor:
    """Dataset images as a (N, H, W) tensor of the training dtype."""
    return torch.from_numpy(np.ascontiguousarray(ds.images)).to(dtype)


def validation_loss(model: Model, images: Tensor, cfg: TrainingConfig) -> float:
    """
    Objective on the validation set in inference mode, with uniform fields from
    a generator re-seeded with cfg.val_seed so epochs are comparable.

    Args:
        model: Model to evaluate
        images: (N, H, W) validation images
        cfg: Training config

    Returns:
        Batch-size weighted mean of the objective
    """
    was_training = model.training
    model.eval()
    generator = torch.Generator().manual_seed(cfg.val_seed)
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, images.shape[0], cfg.batch_size):
            batch = images[start:start + cfg.batch_size]
            total += float(model.objective(batch, generator, cfg).item()) * batch.shape[0]
            count += batch.shape[0]
    model.train(was_training)
    return total / count


def _fit(
    state: TrainState,
    train_images: Tensor,
    val_images: Tensor,
    cfg: TrainingConfig,
    step_fn: Callable[[TrainState, Tensor, torch.Generator], float],
    label: str,
) -> TrainingResult:
    history = TrainingHistory()
    stopper = EarlyStopping(cfg.patience, cfg.min_delta)
    shuffle_gen = torch.Generator().manual_seed(cfg.seed)
    sample_gen = torch.Generator().manual_seed(cfg.sampler.seed)

    history.initial_val_loss = validation_loss(state.model, val_images, cfg)
    stopper.update(history.initial_val_loss)
    state.best_val_loss = stopper.best
    state.best_model_state = state.snapshot()
    logger.info("%s: initial validation loss %.6f", label, history.initial_val_loss)

    started = time.perf_counter()
    for epoch in range(1, cfg.max_epochs + 1):
        state.model.train()
        order = torch.randperm(train_images.shape[0], generator=shuffle_gen)
        total, count = 0.0, 0
        try:
            for start in range(0, order.numel(), cfg.batch_size):
                batch = train_images[order[start:start + cfg.batch_size]]
                total += step_fn(state, batch, sample_gen) * batch.shape[0]
                count += batch.shape[0]
            val_loss = validation_loss(state.model, val_images, cfg)
            if not math.isfinite(val_loss):
                raise DivergenceError(f"non-finite validation loss {val_loss}")
        except DivergenceError as e:
            logger.error("%s diverged at epoch %d: %s", label, epoch, e)
            state.restore_best()
            raise DivergenceError(str(e), history=history, state=state)

        state.epoch = epoch
        record = EpochRecord(
            epoch=epoch,
            train_loss=total / count,
            val_loss=val_loss,
            expected_sparsity=state.model.expected_sparsity(),
            wall_seconds=time.perf_counter() - started,
        )
        history.epochs.append(record)

        if stopper.update(val_loss):
            state.best_model_state = state.snapshot()
            history.best_epoch = epoch
        state.best_val_loss = stopper.best
        state.epochs_since_improvement = stopper.bad_epochs
        logger.info(
            "%s epoch %d: train %.6f val %.6f sparsity %.4f",
            label, epoch, record.train_loss, record.val_loss, record.expected_sparsity,
        )

        if stopper.should_stop:
            history.stopped_early = True
            logger.info("%s: validation plateau after %d epochs", label, epoch)
            break

    state.restore_best()
    return TrainingResult(model=state.model, history=history, state=state)


def _loupe_step(state: TrainState, batch: Tensor, generator: torch.Generator, cfg: TrainingConfig) -> float:
    loss, grads = loupe_loss(state.model, batch, cfg, generator)
    adam_step(state, grads)
    return loss


def _fixed_step(state: TrainState, batch: Tensor, generator: torch.Generator, cfg: TrainingConfig) -> float:
    model: FixedMaskModel = state.model
    check_batch(batch, *model.mask.shape)
    loss = model.objective(batch, None, cfg)
    value = float(loss.item())
    if not math.isfinite(value):
        raise DivergenceError(f"non-finite loss {value}")
    named = list(model.named_parameters())
    grads = torch.autograd.grad(loss, [p for _, p in named])
    adam_step(state, {name: g for (name, _), g in zip(named, grads)})
    return value


def _check_sets(train_set: Dataset, val_set: Dataset) -> None:
    if (train_set.height, train_set.width) != (val_set.height, val_set.width):
        raise ValueError("training and validation images must share one grid")


def train_loupe(train_set: Dataset, val_set: Dataset, cfg: TrainingConfig) -> TrainingResult:
    """
    Jointly learn the probabilistic mask and the anti-aliasing network.

    Args:
        train_set: Training images
        val_set: Validation images
        cfg: Training config

    Returns:
        TrainingResult holding the best-validation model and the per-epoch history

    Raises:
        DivergenceError: On a non-finite loss; carries the history and rolled-back state
    """
    _check_sets(train_set, val_set)
    dtype = resolve_dtype(cfg.dtype)
    init_gen = torch.Generator().manual_seed(cfg.seed)
    model = LoupeModel(train_set.height, train_set.width, cfg, init_gen, dtype)
    state = new_state(model, cfg)
    return _fit(
        state,
        dataset_tensor(train_set, dtype),
        dataset_tensor(val_set, dtype),
        cfg,
        lambda s, b, g: _loupe_step(s, b, g, cfg),
        "loupe",
    )


def train_fixed_mask(mask: Tensor, train_set: Dataset, val_set: Dataset, cfg: TrainingConfig) -> TrainingResult:
    """
    Train a fresh network behind a constant hard mask (no sparsity term).

    Args:
        mask: Binary mask (H, W)
        train_set: Training images
        val_set: Validation images
        cfg: Training config (λ, K and slopes are ignored)

    Returns:
        TrainingResult holding the best-validation model and the per-epoch history
    """
    _check_sets(train_set, val_set)
    dtype = resolve_dtype(cfg.dtype)
    init_gen = torch.Generator().manual_seed(cfg.seed)
    model = FixedMaskModel(mask, cfg, init_gen, dtype)
    state = new_state(model, cfg)
    return _fit(
        state,
        dataset_tensor(train_set, dtype),
        dataset_tensor(val_set, dtype),
        cfg,
        lambda s, b, g: _fixed_step(s, b, g, cfg),
        "fixed",
    )


def write_history_csv(history: TrainingHistory, path: Union[str, Path]) -> Path:
    """
    Write epoch,train_loss,val_loss,expected_sparsity,wall_seconds rows.

    Args:
        history: Training history
        path: Destination CSV

    Returns:
        The written path
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=HISTORY_FIELDS, lineterminator="\n")
        writer.writeheader()
        for record in history.epochs:
            writer.writerow({
                "epoch": record.epoch,
                "train_loss": repr(record.train_loss),
                "val_loss": repr(record.val_loss),
                "expected_sparsity": repr(record.expected_sparsity),
                "wall_seconds": f"{record.wall_seconds:.3f}",
            })
    return path
