"""Checkpoint-driven synthesis and timbre transfer.

The guiding source is either raw audio (analyzed on the fly) or precomputed
control features. The latent curve z comes from the encoder (posterior mean,
for determinism), from one constant, or from a caller-supplied per-frame
curve; constants and curves are clamped to [-3, 3].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio_io import AudioClip
from .checkpoint import LoadedCheckpoint
from .config import FrameConfig
from .errors import InputError
from .features import ControlFrames, analyze
from .model import reparameterize
from .synth import render
from .tape import Tensor

Z_LIMIT = 3.0
Z_MODES = ("encoded", "constant", "curve")
PEAK_TARGET = 10.0 ** (-1.0 / 20.0)  # -1 dBFS


@dataclass
class SynthesisRequest:
    z_mode: str = "encoded"
    z_value: float = 0.0
    z_curve: np.ndarray | None = None
    seed: int = 0
    sample_eps: bool = False  # encoded mode: draw eps instead of using the mean

    def __post_init__(self):
        if self.z_mode not in Z_MODES:
            raise InputError(f"z_mode must be one of {Z_MODES}")
        if self.z_mode == "curve":
            if self.z_curve is None:
                raise InputError("curve mode needs z_curve")
            self.z_curve = np.asarray(self.z_curve, dtype=np.float64)
            if self.z_curve.ndim != 1:
                raise InputError("z_curve must be 1-D")


def resolve_z(request: SynthesisRequest, frame_count: int) -> np.ndarray | None:
    """Constant/curve z as a clamped [frame_count] vector; None means encoded."""
    if request.z_mode == "encoded":
        return None
    if request.z_mode == "constant":
        value = float(np.clip(request.z_value, -Z_LIMIT, Z_LIMIT))
        return np.full(frame_count, value)
    if len(request.z_curve) != frame_count:
        raise InputError(f"z_curve must have {frame_count} frames, got {len(request.z_curve)}")
    return np.clip(request.z_curve, -Z_LIMIT, Z_LIMIT)


def synthesize(
    ckpt: LoadedCheckpoint, source, request: SynthesisRequest = SynthesisRequest()
) -> AudioClip:
    """Render one clip from a guiding source through the checkpoint's model."""
    cfg: FrameConfig = ckpt.config.frames
    mel = None
    if isinstance(source, ControlFrames):
        ctrl = source
    else:
        ctrl, mel = analyze(source, cfg)
    if len(ctrl.f0) != cfg.frame_count:
        raise InputError(f"expected {cfg.frame_count} control frames, got {len(ctrl.f0)}")

    z = resolve_z(request, cfg.frame_count)
    if z is None:
        if mel is None:
            raise InputError("encoded z needs a guiding audio clip, not bare features")
        mu, logvar = ckpt.model.encode(mel)
        if request.sample_eps:
            eps = np.random.default_rng(request.seed).standard_normal(cfg.frame_count)
        else:
            eps = np.zeros(cfg.frame_count)  # posterior mean, reproducible
        z_tensor = reparameterize(mu, logvar, eps)
    else:
        z_tensor = Tensor(z)

    params = ckpt.model.decode(ctrl, z=z_tensor)
    wav = render(params, cfg, seed=request.seed).data

    peak = float(np.max(np.abs(wav))) if len(wav) else 0.0
    if peak > 1.0:
        wav = wav * (PEAK_TARGET / peak)
    return AudioClip(samples=wav, sample_rate=cfg.sample_rate)
