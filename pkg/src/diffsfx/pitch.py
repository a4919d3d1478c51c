"""Per-frame fundamental frequency estimation (YIN-style) and the harmonic
indicator derived from its confidence.

Each analysis frame holds 1024 samples on the same 160-sample grid as every
other feature. The difference function uses a fixed integration window of
1024 - tau_max samples so all lags up to tau_max (40 Hz) fit in the frame;
the cross-correlation term is computed with FFTs across all frames at once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import FrameConfig
from .errors import InputError

WINDOW = 1024
F_MIN = 40.0
F_MAX = 2000.0
THRESHOLD = 0.3


@dataclass
class PitchTrack:
    f0: np.ndarray  # Hz, 0 where unvoiced
    confidence: np.ndarray  # in [0, 1]

    def __post_init__(self):
        self.f0 = np.asarray(self.f0, dtype=np.float64)
        self.confidence = np.asarray(self.confidence, dtype=np.float64)
        if self.f0.shape != self.confidence.shape:
            raise InputError("f0 and confidence must have equal length")


def _frames_centered(x: np.ndarray, size: int, hop: int) -> np.ndarray:
    pad = size // 2
    padded = np.pad(x, pad, mode="reflect")
    n_frames = len(x) // hop
    idx = np.arange(n_frames)[:, None] * hop + np.arange(size)[None, :]
    return padded[idx]


def cmnd(frames: np.ndarray, tau_max: int) -> np.ndarray:
    """Cumulative-mean-normalized difference function, shape [frames, tau_max+1].

    d(tau) = sum_{j<W} (x_j - x_{j+tau})^2 over W = size - tau_max samples;
    d'(0) = 1 and d'(tau) = d(tau) * tau / sum_{s<=tau} d(s).
    """
    n_frames, size = frames.shape
    w = size - tau_max
    if w <= 0:
        raise InputError("frame too short for requested lag range")
    nfft = 1
    while nfft < size + w:
        nfft *= 2
    spec_full = np.fft.rfft(frames, nfft, axis=1)
    spec_head = np.fft.rfft(frames[:, :w], nfft, axis=1)
    corr = np.fft.irfft(spec_head.conj() * spec_full, nfft, axis=1)[:, : tau_max + 1]

    sq = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(frames**2, axis=1)], axis=1)
    e_head = sq[:, w] - sq[:, 0]
    taus = np.arange(tau_max + 1)
    e_tau = sq[:, taus + w] - sq[:, taus]
    d = e_head[:, None] + e_tau - 2.0 * corr
    d = np.maximum(d, 0.0)  # clip FFT rounding noise below zero

    running = np.cumsum(d[:, 1:], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = d[:, 1:] * taus[1:][None, :] / running
    norm = np.where(running > 0.0, norm, 1.0)
    return np.concatenate([np.ones((n_frames, 1)), norm], axis=1)


def _parabolic(dp: np.ndarray, tau: int) -> tuple[float, float]:
    """Refine a local minimum of d' to sub-sample accuracy: (tau_ref, value)."""
    if tau <= 0 or tau >= len(dp) - 1:
        return float(tau), float(dp[tau])
    a, b, c = dp[tau - 1], dp[tau], dp[tau + 1]
    denom = a - 2.0 * b + c
    if denom <= 0.0:
        return float(tau), float(b)
    shift = 0.5 * (a - c) / denom
    shift = float(np.clip(shift, -0.5, 0.5))
    value = b - 0.25 * (a - c) * shift
    return tau + shift, float(value)


def pitch_track(clip, cfg: FrameConfig = FrameConfig()) -> PitchTrack:
    """YIN estimator on the shared frame grid; unvoiced frames get f0 = 0."""
    x = np.asarray(getattr(clip, "samples", clip), dtype=np.float64)
    if x.ndim != 1 or len(x) != cfg.n_samples:
        raise InputError(f"expected {cfg.n_samples} samples, got shape {x.shape}")

    sr = cfg.sample_rate
    tau_min = int(np.floor(sr / F_MAX))
    tau_max = int(np.ceil(sr / F_MIN))
    frames = _frames_centered(x, WINDOW, cfg.frame_size)
    dp = cmnd(frames, tau_max)

    n_frames = frames.shape[0]
    f0 = np.zeros(n_frames)
    conf = np.zeros(n_frames)
    for i in range(n_frames):
        row = dp[i]
        below = np.nonzero(row[tau_min : tau_max + 1] < THRESHOLD)[0]
        if below.size:
            tau = tau_min + int(below[0])
            while tau + 1 <= tau_max and row[tau + 1] < row[tau]:
                tau += 1
            tau_ref, value = _parabolic(row, tau)
            f0[i] = sr / tau_ref
            conf[i] = np.clip(1.0 - value, 0.0, 1.0)
        else:
            residual = float(row[tau_min : tau_max + 1].min())
            conf[i] = np.clip(1.0 - residual, 0.0, 1.0)
    return PitchTrack(f0=f0, confidence=conf)


def harmonic_indicator(confidence) -> np.ndarray:
    """H = 1 / (1 + exp(-10 (C - 0.7))), elementwise; strictly monotone in C."""
    c = np.asarray(confidence, dtype=np.float64)
    if np.any(c < 0.0) or np.any(c > 1.0):
        raise InputError("confidence must lie in [0, 1]")
    return 1.0 / (1.0 + np.exp(-10.0 * (c - 0.7)))
