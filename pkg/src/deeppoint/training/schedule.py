"""Learning-rate schedule: constant, then linear decay to zero."""

from __future__ import annotations

from ..config import TrainConfig
from ..errors import InvalidInput


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    if not 0 <= epoch < cfg.epochs:
        raise InvalidInput(f"epoch {epoch} outside [0, {cfg.epochs})")
    if epoch < cfg.decay_start_epoch:
        return cfg.base_lr
    return cfg.base_lr * (cfg.epochs - epoch) / (cfg.epochs - cfg.decay_start_epoch)
