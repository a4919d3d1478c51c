"""WAV ingestion and emission.

Every clip entering the system is normalized to the canonical shape: mono,
16 kHz, exactly 64000 samples (first four seconds kept, short tails
zero-padded). Output files are 16-bit PCM.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from math import gcd

import numpy as np
import scipy.io.wavfile
import scipy.signal

from .config import FrameConfig
from .errors import InputError


@dataclass
class AudioClip:
    samples: np.ndarray
    sample_rate: int = 16000

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise InputError("AudioClip is mono")

    @property
    def length(self) -> int:
        return len(self.samples)


_PCM_SCALE = {np.dtype(np.int16): 2**15, np.dtype(np.int32): 2**31}


def read_wav(source) -> tuple[np.ndarray, int]:
    """Read a RIFF/WAVE file (path or bytes) to float64 in [-1, 1] plus rate."""
    try:
        if isinstance(source, (bytes, bytearray)):
            rate, data = scipy.io.wavfile.read(io.BytesIO(bytes(source)))
        else:
            rate, data = scipy.io.wavfile.read(source)
    except Exception as exc:
        name = "<bytes>" if isinstance(source, (bytes, bytearray)) else str(source)
        raise InputError(f"cannot read WAV '{name}': {exc}") from exc
    data = np.asarray(data)
    if data.dtype in _PCM_SCALE:
        out = data.astype(np.float64) / _PCM_SCALE[data.dtype]
    elif data.dtype == np.uint8:
        out = (data.astype(np.float64) - 128.0) / 128.0
    else:
        out = data.astype(np.float64)
    return out, int(rate)


def write_wav(path, samples, sample_rate: int = 16000) -> None:
    """Write mono 16-bit PCM; values are clipped to [-1, 1] first."""
    x = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(x * 32767.0).astype(np.int16)
    scipy.io.wavfile.write(path, sample_rate, pcm)


def wav_bytes(samples, sample_rate: int = 16000) -> bytes:
    buf = io.BytesIO()
    write_wav(buf, samples, sample_rate)
    return buf.getvalue()


def resample(x: np.ndarray, sr_in: int, sr_out: int) -> np.ndarray:
    """Windowed-sinc rational resampling."""
    if sr_in == sr_out:
        return np.asarray(x, dtype=np.float64)
    g = gcd(sr_in, sr_out)
    return scipy.signal.resample_poly(np.asarray(x, dtype=np.float64), sr_out // g, sr_in // g)


def ingest(source, cfg: FrameConfig = FrameConfig()) -> AudioClip:
    """Any readable WAV -> canonical AudioClip (mono, cfg rate, cfg length).

    Stereo is averaged, the first four seconds are kept (short clips are
    zero-padded at the tail), and the signal is rescaled only when its peak
    exceeds full scale.
    """
    data, rate = read_wav(source)
    if data.ndim == 2:
        data = data.mean(axis=1)
    elif data.ndim != 1:
        raise InputError("unsupported channel layout")
    data = resample(data, rate, cfg.sample_rate)
    n = cfg.n_samples
    if len(data) >= n:
        data = data[:n]
    else:
        data = np.pad(data, (0, n - len(data)))
    peak = np.max(np.abs(data)) if len(data) else 0.0
    if peak > 1.0:
        data = data / peak
    return AudioClip(samples=data, sample_rate=cfg.sample_rate)
