"""
Optimizer State
Training state (model, ADAM moments, counters) and the joint ADAM update.
"""
import copy
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import torch
import torch.nn as nn
from torch import Tensor

from app.schemas.config import TrainingConfig
from app.services.training.objective import DivergenceError, FixedMaskModel, LoupeModel

Model = Union[LoupeModel, FixedMaskModel]


@dataclass
class TrainState:
    """Everything needed to resume or roll back training"""
    model: Model
    optimizer: torch.optim.Adam
    step: int = 0
    epoch: int = 0
    best_val_loss: float = math.inf
    epochs_since_improvement: int = 0
    best_model_state: Optional[Dict[str, Tensor]] = field(default=None, repr=False)

    def snapshot(self) -> Dict[str, Tensor]:
        """Detached copy of the model state dict"""
        return copy.deepcopy(self.model.state_dict())

    def restore_best(self) -> None:
        if self.best_model_state is not None:
            self.model.load_state_dict(self.best_model_state)


def build_optimizer(model: nn.Module, cfg: TrainingConfig) -> torch.optim.Adam:
    """ADAM over every trainable tensor of the model (mask weights and network)."""
    return torch.optim.Adam(
        model.parameters(),
        lr=cfg.learning_rate,
        betas=(cfg.adam_beta1, cfg.adam_beta2),
        eps=cfg.adam_epsilon,
        foreach=False,
    )


def new_state(model: Model, cfg: TrainingConfig) -> TrainState:
    return TrainState(model=model, optimizer=build_optimizer(model, cfg))


def adam_step(state: TrainState, grads: Dict[str, Tensor]) -> TrainState:
    """
    One bias-corrected ADAM update applied jointly to all parameters.

    Args:
        state: Current training state (updated in place)
        grads: Gradients keyed by parameter name

    Returns:
        The same state with parameters, moments and step counter advanced

    Raises:
        DivergenceError: If any gradient is non-finite
    """
    for name, grad in grads.items():
        if not torch.isfinite(grad).all():
            raise DivergenceError(f"non-finite gradient for {name}")

    for name, param in state.model.named_parameters():
        grad = grads.get(name)
        param.grad = None if grad is None else grad.detach().to(param.dtype).clone()

    state.optimizer.step()
    state.optimizer.zero_grad(set_to_none=True)
    state.step += 1
    return state
