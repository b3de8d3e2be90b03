"""Training and serving for the compact extractive span model."""

from .model import ModelConfig, SpanModel, load_checkpoint, save_checkpoint
from .server import InferenceEngine, ThreadedServer, create_app, serve
from .spans import DropRateExceeded, SpanExample, prepare_spans
from .training import TrainingConfig, TrainResult, pretrain_base, train

__all__ = [
    "DropRateExceeded",
    "InferenceEngine",
    "ModelConfig",
    "SpanExample",
    "SpanModel",
    "ThreadedServer",
    "TrainingConfig",
    "TrainResult",
    "create_app",
    "load_checkpoint",
    "pretrain_base",
    "prepare_spans",
    "save_checkpoint",
    "serve",
    "train",
]
