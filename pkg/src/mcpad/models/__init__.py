"""Detector, loss, training and the handcrafted texture baseline."""

from mcpad.models.config import ModelConfig, TrainConfig
from mcpad.models.net import PixBiSNet, adapt_first_layer, build_model
from mcpad.models.loss import pixbis_loss, pixbis_loss_grads
from mcpad.models.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from mcpad.models.train import (
    InMemoryCubeSource,
    TrainingError,
    extract_features,
    score,
    score_frames,
    train,
)
from mcpad.models.complexity import (
    conv2d_complexity,
    linear_complexity,
    model_complexity_report,
)
from mcpad.models.haralick import glcm_stats, haralick_features, undecimated_haar
from mcpad.models.linear import LinearClassifier, fit_linear_classifier

__all__ = [
    "Checkpoint",
    "InMemoryCubeSource",
    "LinearClassifier",
    "ModelConfig",
    "PixBiSNet",
    "TrainConfig",
    "TrainingError",
    "adapt_first_layer",
    "build_model",
    "conv2d_complexity",
    "extract_features",
    "fit_linear_classifier",
    "glcm_stats",
    "haralick_features",
    "linear_complexity",
    "load_checkpoint",
    "model_complexity_report",
    "pixbis_loss",
    "pixbis_loss_grads",
    "save_checkpoint",
    "score",
    "score_frames",
    "train",
    "undecimated_haar",
]
