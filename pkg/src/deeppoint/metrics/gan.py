"""Least-squares GAN objectives and the combined generator loss."""

from __future__ import annotations

from ..autodiff import Tape, Tensor, add, add_scalar, scale, square
from ..config import LossWeights

Scalar = Tensor | float


def _tensor(value: Scalar, tape: Tape) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return tape.constant([[float(value)]])


def _shared_tape(*values: Scalar) -> Tape:
    for value in values:
        if isinstance(value, Tensor) and value.tape is not None:
            return value.tape
    return Tape(record=False)


def gan_losses(score_real: Scalar, score_fake: Scalar) -> tuple[Tensor, Tensor]:
    """``L_D = ((s_real - 1)^2 + s_fake^2) / 2`` and ``L_G_adv = (s_fake - 1)^2``."""
    tape = _shared_tape(score_real, score_fake)
    real, fake = _tensor(score_real, tape), _tensor(score_fake, tape)
    loss_d = scale(add(square(add_scalar(real, -1.0)), square(fake)), 0.5)
    loss_g = square(add_scalar(fake, -1.0))
    return loss_d, loss_g


def generator_total_loss(loss_g_adv: Scalar, cd: Scalar, emd: Scalar, weights: LossWeights) -> Scalar:
    """Adversarial term plus weighted Chamfer and EMD terms."""
    if not any(isinstance(v, Tensor) for v in (loss_g_adv, cd, emd)):
        return float(loss_g_adv) + weights.cf * float(cd) + weights.emd * float(emd)
    tape = _shared_tape(loss_g_adv, cd, emd)
    total = add(_tensor(loss_g_adv, tape), scale(_tensor(cd, tape), weights.cf))
    return add(total, scale(_tensor(emd, tape), weights.emd))
