"""Training objectives: multi-scale spectral reconstruction and KL regularizer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import tape as tp
from .errors import InputError
from .tape import Tensor, as_tensor

FFT_SIZES = (2048, 1024, 512, 256, 128, 64)
LOG_EPS = 1e-7


@dataclass
class LossReport:
    total: float
    reconstruction: float
    regularization: float
    beta: float
    step: int

    @classmethod
    def from_parts(cls, reconstruction: float, regularization: float, beta: float, step: int):
        reconstruction = float(reconstruction)
        regularization = float(regularization)
        return cls(
            total=reconstruction + beta * regularization,
            reconstruction=reconstruction,
            regularization=regularization,
            beta=float(beta),
            step=int(step),
        )


def _spectrum(x: Tensor, size: int) -> Tensor:
    window = scipy.signal.windows.hann(size, sym=False)
    frames = tp.frame_windows(x, size, size // 4)
    return tp.rfft_magnitude(tp.mul(frames, Tensor(window[None, :])), size)


def multiscale_stft_loss(x, y, sizes=FFT_SIZES) -> Tensor:
    """Sum over FFT sizes of L1 magnitude distance plus L1 log-magnitude distance."""
    x, y = as_tensor(x), as_tensor(y)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("signals must be 1-D and equal length")
    total = None
    for size in sizes:
        sx = _spectrum(x, size)
        sy = _spectrum(y, size)
        lin = tp.mean_(tp.absolute(tp.sub(sx, sy)))
        logs = tp.mean_(
            tp.absolute(tp.sub(tp.log(tp.add(sx, LOG_EPS)), tp.log(tp.add(sy, LOG_EPS))))
        )
        term = tp.add(lin, logs)
        total = term if total is None else tp.add(total, term)
    return total


def kl_loss(mu, logvar) -> Tensor:
    """Mean over frames of -0.5 * (1 + logvar - mu^2 - exp(logvar)); >= 0."""
    mu, logvar = as_tensor(mu), as_tensor(logvar)
    if mu.shape != logvar.shape:
        raise InputError("mu and logvar shapes differ")
    inner = tp.sub(tp.add(1.0, logvar), tp.add(tp.mul(mu, mu), tp.exp(logvar)))
    return tp.mul(tp.mean_(inner), -0.5)
