"""Differentiable sound-effects synthesis: analysis, training, and rendering."""

__version__ = "0.1.0"

from .config import FrameConfig, ModelConfig, RunConfig, TrainConfig
from .errors import CheckpointError, ConfigError, DiffsfxError, InputError, NumericsError

__all__ = [
    "FrameConfig",
    "ModelConfig",
    "RunConfig",
    "TrainConfig",
    "DiffsfxError",
    "InputError",
    "ConfigError",
    "CheckpointError",
    "NumericsError",
    "__version__",
]
