"""Spectrum-to-parameters regressor: numpy network, training, inference, model files."""

from .layers import Conv2D, Dense, Flatten, Layer, ReLU
from .network import ConvBlock, ModelConfig, Network, build_network
from .optim import Adam
from .training import (
    LearningRatePolicy,
    TrainConfig,
    TrainedModel,
    TrainingProvenance,
    TrainingStage,
    evaluate_loss,
    fine_tune,
    mse_loss,
    pretrain,
)
from .predict import Prediction, predict, predict_detailed, raw_outputs
from .metrics import AccReport, accuracy, evaluate, per_axis_accuracy
from .serialization import decode_model, encode_model, load_model, persist_model

__all__ = [
    "Conv2D", "Dense", "Flatten", "Layer", "ReLU",
    "ConvBlock", "ModelConfig", "Network", "build_network", "Adam",
    "LearningRatePolicy", "TrainConfig", "TrainedModel", "TrainingProvenance", "TrainingStage",
    "evaluate_loss", "fine_tune", "mse_loss", "pretrain",
    "Prediction", "predict", "predict_detailed", "raw_outputs",
    "AccReport", "accuracy", "evaluate", "per_axis_accuracy",
    "decode_model", "encode_model", "load_model", "persist_model",
]
