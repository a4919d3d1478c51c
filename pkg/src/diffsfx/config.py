"""Engine configuration records.

Three dataclasses describe everything a model run needs: the audio framing
(`FrameConfig`), the network sizes (`ModelConfig`) and the optimization
schedule (`TrainConfig`). They serialize to/from plain JSON so a single
config file can be checked into an experiment directory.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class FrameConfig:
    """Fixed-length framing shared by analysis and synthesis."""

    frame_size: int = 160
    frame_count: int = 400
    sample_rate: int = 16000

    def __post_init__(self):
        if self.frame_size <= 0 or self.frame_count <= 0:
            raise ConfigError("frame_size and frame_count must be positive")
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")

    @property
    def n_samples(self) -> int:
        return self.frame_size * self.frame_count

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate


@dataclass(frozen=True)
class ModelConfig:
    """Network sizes for the encoder/decoder pair.

    ``hidden_units`` is 1024 at full scale and 64 for the desk-scale profile
    used by the test suite.
    """

    hidden_units: int = 1024
    n_harmonics: int = 100
    n_noise_bands: int = 100
    conv_channels: tuple[int, ...] = (32, 64, 128)
    conv_kernel: int = 5
    n_mel: int = 128

    def __post_init__(self):
        if self.hidden_units % 4 != 0:
            raise ConfigError("hidden_units must be divisible by 4 (per-feature projections)")
        if self.conv_kernel % 2 != 1:
            raise ConfigError("conv_kernel must be odd")

    @classmethod
    def desk_scale(cls) -> "ModelConfig":
        return cls(hidden_units=64)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 16
    total_steps: int = 100_000
    lr_start: float = 1e-4
    lr_end: float = 1e-5
    lr_decay_until: float = 0.8
    beta_activate_at: float = 0.1
    beta_start: float = 1.0
    beta_end: float = 1e3
    beta_ramp_until: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta_activate_at < self.beta_ramp_until <= 1.0):
            raise ConfigError("need 0 < beta_activate_at < beta_ramp_until <= 1")
        if self.total_steps <= 0 or self.batch_size <= 0:
            raise ConfigError("total_steps and batch_size must be positive")

    @classmethod
    def desk_scale(cls, steps: int = 1000, seed: int = 0) -> "TrainConfig":
        # short runs need a hotter learning rate than the 100k-step default
        return cls(batch_size=1, total_steps=steps, lr_start=1e-3, lr_end=1e-4, seed=seed)


@dataclass
class RunConfig:
    """Bundle persisted in config files and checkpoints."""

    frames: FrameConfig = field(default_factory=FrameConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_dict(self) -> dict:
        return {
            "frames": asdict(self.frames),
            "model": asdict(self.model),
            "train": asdict(self.train),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        model_kw = dict(d.get("model", {}))
        if "conv_channels" in model_kw:
            model_kw["conv_channels"] = tuple(model_kw["conv_channels"])
        return cls(
            frames=FrameConfig(**d.get("frames", {})),
            model=ModelConfig(**model_kw),
            train=TrainConfig(**d.get("train", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
