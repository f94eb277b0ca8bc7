"""Training loop, evaluation and ablation sweeps."""

from .ablation import PRESETS, AblationTable, Variant, ablation_sweep, reference_for, variants_for
from .evaluate import (
    Prediction,
    TrainingPair,
    coarse_baseline,
    coarse_from_depth,
    evaluate,
    evaluate_predictions,
    generator_from_checkpoint,
    load_pair,
    reconstruct,
)
from .schedule import lr_at
from .trainer import (
    Networks,
    StepLosses,
    TrainResult,
    checkpoint_dir,
    discriminator_update,
    generator_update,
    init_networks,
    read_state,
    train,
    train_step,
)

__all__ = [
    "AblationTable",
    "Networks",
    "PRESETS",
    "Prediction",
    "StepLosses",
    "TrainResult",
    "TrainingPair",
    "Variant",
    "ablation_sweep",
    "checkpoint_dir",
    "coarse_baseline",
    "coarse_from_depth",
    "discriminator_update",
    "evaluate",
    "evaluate_predictions",
    "generator_from_checkpoint",
    "generator_update",
    "init_networks",
    "load_pair",
    "lr_at",
    "read_state",
    "reconstruct",
    "reference_for",
    "train",
    "train_step",
    "variants_for",
]
