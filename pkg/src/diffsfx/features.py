"""Analysis features: spectrogram, mel projection, loudness, HPSS, onsets.

Everything shares one frame grid: 160-sample hop, frame centers at t*hop,
exactly len(x)//hop frames (400 for a four-second clip). The onset detector
works on the percussive component isolated by margin-based HPSS, then picks
strict local maxima of per-frame energy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.ndimage
import scipy.signal

from .config import FrameConfig
from .errors import ConfigError, InputError
from .pitch import harmonic_indicator, pitch_track

STFT_WINDOW = 1024
STFT_FFT = 1024
N_MEL = 128
LOUDNESS_FLOOR = -80.0
# full-scale sine, Hann window of 1024: spectral line plus two side bins carry
# 3 N^2 / 32 of one-sided power; subtracting this pins that sine near 0 dB
LOUDNESS_REF = 10.0 * np.log10(3.0 * STFT_FFT**2 / 32.0)


@dataclass
class ControlFrames:
    """Per-frame conditioning features; z appears only after encoding."""

    f0: np.ndarray
    loudness: np.ndarray
    onset: np.ndarray
    harmonic: np.ndarray
    z: np.ndarray | None = None
    confidence: np.ndarray | None = None  # raw pitch confidence, kept for caching

    def __post_init__(self):
        for name in ("f0", "loudness", "onset", "harmonic"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        n = len(self.f0)
        for name in ("loudness", "onset", "harmonic"):
            if len(getattr(self, name)) != n:
                raise InputError("control vectors must share one length")
        if self.z is not None:
            self.z = np.asarray(self.z, dtype=np.float64)
            if len(self.z) != n:
                raise InputError("z must match the frame count")
        if self.confidence is not None:
            self.confidence = np.asarray(self.confidence, dtype=np.float64)
            if len(self.confidence) != n:
                raise InputError("confidence must match the frame count")
            if np.any((self.confidence < 0.0) | (self.confidence > 1.0)):
                raise InputError("confidence must lie in [0, 1]")
        if np.any(self.onset < 0.0):
            raise InputError("onset amplitudes must be nonnegative")
        if np.any((self.loudness < LOUDNESS_FLOOR - 1e-9) | (self.loudness > 1e-9)):
            raise InputError("loudness must lie in [-80, 0] dB")
        if np.any((self.harmonic <= 0.0) | (self.harmonic >= 1.0)):
            raise InputError("harmonic indicator must lie in (0, 1)")


@dataclass
class MelSpec:
    magnitudes: np.ndarray  # [bands, frames], log1p of mel energy

    def __post_init__(self):
        self.magnitudes = np.asarray(self.magnitudes, dtype=np.float64)
        if self.magnitudes.ndim != 2:
            raise InputError("mel magnitudes must be 2-D")
        if np.any(self.magnitudes < 0.0):
            raise InputError("mel magnitudes must be nonnegative")


@dataclass
class HpssConfig:
    margin: float = 8.0
    median_kernel_time: int = 17
    median_kernel_freq: int = 17

    def __post_init__(self):
        if self.margin <= 1.0:
            raise ConfigError("margin must exceed 1 for disjoint masks")
        for k in (self.median_kernel_time, self.median_kernel_freq):
            if k < 1 or k % 2 == 0:
                raise ConfigError("median kernels must be odd and positive")


def _samples(clip) -> np.ndarray:
    x = np.asarray(getattr(clip, "samples", clip), dtype=np.float64)
    if x.ndim != 1:
        raise InputError("expected a mono signal")
    return x


def stft(clip, window: int = STFT_WINDOW, hop: int = 160, fft_size: int = STFT_FFT) -> np.ndarray:
    """Centered complex spectrogram [fft_size//2+1, len(x)//hop]."""
    x = _samples(clip)
    if len(x) == 0:
        raise InputError("empty signal")
    if hop <= 0:
        raise InputError("hop must be positive")
    if window > fft_size:
        raise InputError("window cannot exceed fft size")

    pad = fft_size // 2
    padded = np.pad(x, pad, mode="reflect" if len(x) > pad else "constant")
    n_frames = len(x) // hop
    idx = np.arange(n_frames)[:, None] * hop + np.arange(fft_size)[None, :]
    frames = padded[idx]

    win = scipy.signal.windows.hann(window, sym=False)
    if window < fft_size:
        lo = (fft_size - window) // 2
        full = np.zeros(fft_size)
        full[lo : lo + window] = win
        win = full
    return np.fft.rfft(frames * win[None, :], axis=1).T


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mel: int, fft_size: int, sr: int) -> np.ndarray:
    """[n_mel, fft_size//2+1] triangular filters spanning 0 Hz to Nyquist."""
    edges = _mel_to_hz(np.linspace(0.0, _hz_to_mel(sr / 2.0), n_mel + 2))
    freqs = np.arange(fft_size // 2 + 1) * sr / fft_size
    lower, center, upper = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (freqs[None, :] - lower) / np.maximum(center - lower, 1e-12)
    down = (upper - freqs[None, :]) / np.maximum(upper - center, 1e-12)
    return np.maximum(0.0, np.minimum(up, down))


def mel_spectrogram(clip, cfg: FrameConfig = FrameConfig(), n_mel: int = N_MEL) -> MelSpec:
    """log(1 + mel-projected magnitude spectrogram), [n_mel, frame_count]."""
    x = _samples(clip)
    if len(x) != cfg.n_samples:
        raise InputError(f"expected {cfg.n_samples} samples, got {len(x)}")
    mag = np.abs(stft(x, STFT_WINDOW, cfg.frame_size, STFT_FFT))
    bank = mel_filterbank(n_mel, STFT_FFT, cfg.sample_rate)
    return MelSpec(magnitudes=np.log1p(bank @ mag))


def a_weighting_db(freqs: np.ndarray) -> np.ndarray:
    """Standard A-weighting curve in dB (0 dB at 1 kHz)."""
    f2 = np.asarray(freqs, dtype=np.float64) ** 2
    num = 12194.0**2 * f2**2
    den = (
        (f2 + 20.6**2)
        * np.sqrt((f2 + 107.7**2) * (f2 + 737.9**2))
        * (f2 + 12194.0**2)
    )
    with np.errstate(divide="ignore"):
        gain = 20.0 * np.log10(np.where(den > 0, num / np.maximum(den, 1e-300), 0.0))
    return gain + 2.0


def loudness(clip, cfg: FrameConfig = FrameConfig()) -> np.ndarray:
    """Per-frame A-weighted power in dB, clamped to [-80, 0]."""
    x = _samples(clip)
    if len(x) != cfg.n_samples:
        raise InputError(f"expected {cfg.n_samples} samples, got {len(x)}")
    power = np.abs(stft(x, STFT_WINDOW, cfg.frame_size, STFT_FFT)) ** 2
    freqs = np.arange(STFT_FFT // 2 + 1) * cfg.sample_rate / STFT_FFT
    weights = 10.0 ** (a_weighting_db(freqs) / 10.0)
    weights[0] = 0.0  # DC carries no loudness
    frame_power = weights @ power
    db = 10.0 * np.log10(frame_power + 1e-10) - LOUDNESS_REF
    return np.clip(db, LOUDNESS_FLOOR, 0.0)


def hpss(spec: np.ndarray, cfg: HpssConfig = HpssConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Binary (harmonic_mask, percussive_mask) from median-filter comparison.

    spec is a nonnegative magnitude spectrogram [bins, frames]. Harmonic
    structure is smooth along time, percussive along frequency; a bin joins a
    mask only when its smoothed value beats the other by the margin factor.
    """
    spec = np.asarray(spec, dtype=np.float64)
    if np.any(spec < 0.0):
        raise InputError("magnitude spectrogram must be nonnegative")
    harm = scipy.ndimage.median_filter(spec, size=(1, cfg.median_kernel_time))
    perc = scipy.ndimage.median_filter(spec, size=(cfg.median_kernel_freq, 1))
    harmonic_mask = (harm > cfg.margin * perc).astype(np.float64)
    percussive_mask = (perc > cfg.margin * harm).astype(np.float64)
    return harmonic_mask, percussive_mask


def onset_vector(clip, cfg: FrameConfig = FrameConfig(), hpss_cfg: HpssConfig = HpssConfig()) -> np.ndarray:
    """Onset amplitude per frame: strict local maxima of percussive energy.

    A frame qualifies when its percussive energy e[n] is strictly greater
    than every neighbor within two frames, exceeds 0.05 * max(e), and clears
    an absolute floor tied to the clip's own spectral energy (pure numerical
    leakage from all-harmonic material must not register). Amplitudes are
    sqrt(e[n] / max(e)) in (0, 1]. Frames whose analysis window crosses the
    clip boundary see padding, not signal, so they can never be onsets; this
    also stops the boundary discontinuity from masquerading as a transient.
    """
    x = _samples(clip)
    if len(x) != cfg.n_samples:
        raise InputError(f"expected {cfg.n_samples} samples, got {len(x)}")
    spec = np.abs(stft(x, STFT_WINDOW, cfg.frame_size, STFT_FFT))
    _, percussive_mask = hpss(spec, hpss_cfg)
    e = ((percussive_mask * spec) ** 2).sum(axis=0)

    guard = int(np.ceil((STFT_FFT // 2) / cfg.frame_size))
    e[:guard] = 0.0
    e[len(e) - guard :] = 0.0

    out = np.zeros_like(e)
    peak = e.max()
    if peak <= 0.0:
        return out
    floor = 1e-8 * (spec**2).sum(axis=0).max()

    padded = np.pad(e, 2, constant_values=-1.0)
    for n in range(len(e)):
        window = padded[n : n + 5]
        if e[n] <= max(0.05 * peak, floor):
            continue
        if all(e[n] > window[j] for j in (0, 1, 3, 4)):
            out[n] = np.sqrt(e[n] / peak)
    return out


def analyze(clip, cfg: FrameConfig = FrameConfig()) -> tuple[ControlFrames, MelSpec]:
    """Bundle every conditioning feature for one clip."""
    x = _samples(clip)
    if len(x) != cfg.n_samples:
        raise InputError(f"expected {cfg.n_samples} samples, got {len(x)}")
    track = pitch_track(x, cfg)
    ctrl = ControlFrames(
        f0=track.f0,
        loudness=loudness(x, cfg),
        onset=onset_vector(x, cfg),
        harmonic=harmonic_indicator(track.confidence),
        confidence=track.confidence,
    )
    return ctrl, mel_spectrogram(x, cfg)
