"""NumPy neural-network stack for frequency-convolutional mask estimators."""
from .checkpoint import load_checkpoint, save_checkpoint
from .model import (
    LayerSpec,
    MaskEstimator,
    ModelConfig,
    count_params,
    layer_shapes,
    param_increase_pct,
    reference_config,
)
from .optim import AdamState, adam_step
from .train import TrainConfig, TrainingExample, TrainLog, evaluate_loss, prepare_example, train

__all__ = [
    "AdamState",
    "LayerSpec",
    "MaskEstimator",
    "ModelConfig",
    "TrainConfig",
    "TrainLog",
    "TrainingExample",
    "adam_step",
    "count_params",
    "evaluate_loss",
    "layer_shapes",
    "load_checkpoint",
    "param_increase_pct",
    "prepare_example",
    "reference_config",
    "save_checkpoint",
    "train",
]
