"""The three differentiable synthesizers and their shared control upsampling.

Controls live at frame rate (one value per analysis frame) and are linearly
interpolated between frame centers before driving the oscillators:

* harmonic: bank of sinusoids at integer multiples of f0, cumulative-phase
  oscillator, partials at or above Nyquist masked out and the remaining
  distribution renormalized.
* noise: per-frame FIR filters designed by frequency sampling from band gains,
  applied to fixed uniform noise and overlap-added at the frame positions.
* transient: per-frame damped-oscillation shapes expressed in the DCT domain,
  x = dct3(A * sin(2*pi*F*k)), which places a sharp impulse-like burst inside
  the frame at a position controlled by F.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.signal
import scipy.sparse

from . import tape as tp
from .config import FrameConfig
from .errors import InputError
from .tape import Tensor, as_tensor

FILTER_FFT = 512  # design grid for the noise FIR; taps are cropped from it


@dataclass
class SynthParams:
    """Frame-rate controls for one clip; every field is a tape Tensor.

    Shapes, with T frames, K harmonics, B bands:
    f0 [T], harmonic_amp [T], distribution [T, K], noise_bands [T, B],
    transient_freq [T] in [0, 0.5], transient_amp [T], harmonic_gate [T].
    """

    f0: Tensor
    harmonic_amp: Tensor
    distribution: Tensor
    noise_bands: Tensor
    transient_freq: Tensor
    transient_amp: Tensor
    harmonic_gate: Tensor

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            setattr(self, name, as_tensor(getattr(self, name)))
        t = self.f0.shape[0]
        for name in ("harmonic_amp", "transient_freq", "transient_amp", "harmonic_gate"):
            if getattr(self, name).shape != (t,):
                raise InputError(f"{name} must have shape ({t},)")
        for name in ("distribution", "noise_bands"):
            field = getattr(self, name)
            if field.ndim != 2 or field.shape[0] != t:
                raise InputError(f"{name} must have shape ({t}, K)")


@lru_cache(maxsize=8)
def _upsample_op(frame_count: int, frame_size: int) -> scipy.sparse.csr_matrix:
    return tp.build_upsample_operator(frame_count, frame_size)


def upsample_controls(v, frame_size: int) -> Tensor:
    """Frame-rate [T] or [T, K] -> sample-rate [T*frame_size] (or [.., K])."""
    v = as_tensor(v)
    op = _upsample_op(v.shape[0], frame_size)
    return tp.linear_map(op, v)


@lru_cache(maxsize=8)
def _band_interp(n_bands: int, n_bins: int) -> np.ndarray:
    """[n_bands, n_bins] matrix: band gains -> linear interp on the FFT grid.

    Band b sits at normalized frequency b / (n_bands - 1), bin i at
    i / (n_bins - 1); returned transposed for right-multiplication.
    """
    pos = np.arange(n_bins) * (n_bands - 1) / (n_bins - 1)
    i0 = np.minimum(pos.astype(np.int64), n_bands - 2)
    w = pos - i0
    m = np.zeros((n_bins, n_bands))
    m[np.arange(n_bins), i0] = 1.0 - w
    m[np.arange(n_bins), i0 + 1] = w
    return m.T.copy()


def harmonic_synth(f0, harmonic_amp, distribution, harmonic_gate, cfg: FrameConfig) -> Tensor:
    """Additive bank of sinusoids at k * f0 with per-frame amplitude envelopes."""
    f0, harmonic_amp = as_tensor(f0), as_tensor(harmonic_amp)
    distribution, harmonic_gate = as_tensor(distribution), as_tensor(harmonic_gate)
    t_frames, n_harm = distribution.shape
    k = np.arange(1, n_harm + 1, dtype=np.float64)

    # partials at or above Nyquist are silenced; the mask is a function of the
    # measured f0, so it carries no gradient
    mask = (f0.data[:, None] * k[None, :]) < (cfg.sample_rate / 2.0)
    masked = tp.mul(distribution, Tensor(mask.astype(np.float64)))
    denom = tp.sum_(masked, axis=1, keepdims=True)
    # rows with every partial masked stay silent; 0/1 keeps them well-defined
    denom = tp.add(denom, Tensor((denom.data == 0.0).astype(np.float64)))
    dist_norm = tp.div(masked, denom)

    gain = tp.mul(tp.reshape(harmonic_amp, (t_frames, 1)), tp.reshape(harmonic_gate, (t_frames, 1)))
    envelopes = upsample_controls(tp.mul(gain, dist_norm), cfg.frame_size)

    f0_up = upsample_controls(f0, cfg.frame_size)
    phase = tp.cumsum(tp.mul(f0_up, 2.0 * np.pi / cfg.sample_rate))
    phases = tp.mul(tp.reshape(phase, (cfg.n_samples, 1)), Tensor(k[None, :]))
    return tp.sum_(tp.mul(tp.sin(phases), envelopes), axis=1)


def _filter_taps(noise_bands, cfg: FrameConfig) -> Tensor:
    """Band gains [T, B] -> windowed zero-phase FIR taps [T, 2*frame_size+1]."""
    noise_bands = as_tensor(noise_bands)
    n_bins = FILTER_FFT // 2 + 1
    interp = Tensor(_band_interp(noise_bands.shape[1], n_bins))
    bins = tp.matmul(noise_bands, interp)
    impulse = tp.irfft_real(bins, FILTER_FFT)
    centered = tp.concat(
        [impulse[:, FILTER_FFT // 2 :], impulse[:, : FILTER_FFT // 2]], axis=1
    )
    taps = 2 * cfg.frame_size + 1
    if taps > FILTER_FFT:
        raise InputError("frame size too large for the filter design grid")
    lo = FILTER_FFT // 2 - cfg.frame_size
    cropped = centered[:, lo : lo + taps]
    window = scipy.signal.windows.hann(taps, sym=True)
    return tp.mul(cropped, Tensor(window[None, :]))


def noise_synth(noise_bands, cfg: FrameConfig, seed: int) -> Tensor:
    """Subtractive synthesis: filtered uniform noise, overlap-added per frame."""
    noise_bands = as_tensor(noise_bands)
    t_frames = noise_bands.shape[0]
    taps = _filter_taps(noise_bands, cfg)
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-1.0, 1.0, size=(t_frames, cfg.frame_size))
    # zero-phase filter: compensate the (taps-1)/2 group delay
    starts = np.arange(t_frames) * cfg.frame_size - cfg.frame_size
    return tp.conv_overlap_add(taps, noise, starts, t_frames * cfg.frame_size)


def transient_synth(transient_freq, transient_amp, cfg: FrameConfig) -> Tensor:
    """Per-frame DCT-domain sinusoids, laid back to back in time."""
    transient_freq, transient_amp = as_tensor(transient_freq), as_tensor(transient_amp)
    t_frames = transient_freq.shape[0]
    k = np.arange(cfg.frame_size, dtype=np.float64)
    phase = tp.mul(tp.reshape(transient_freq, (t_frames, 1)), Tensor(2.0 * np.pi * k[None, :]))
    coeffs = tp.mul(tp.sin(phase), tp.reshape(transient_amp, (t_frames, 1)))
    frames = tp.dct3(coeffs)
    return tp.reshape(frames, (t_frames * cfg.frame_size,))


def render(params: SynthParams, cfg: FrameConfig, seed: int) -> Tensor:
    """Sum of the three synthesizer outputs."""
    harm = harmonic_synth(
        params.f0, params.harmonic_amp, params.distribution, params.harmonic_gate, cfg
    )
    noise = noise_synth(params.noise_bands, cfg, seed)
    trans = transient_synth(params.transient_freq, params.transient_amp, cfg)
    return tp.add(tp.add(harm, noise), trans)
