"""Variational encoder/decoder that drives the synthesizers.

Encoder: three 1-D convolution stacks over time (kernel 5, channels
32/64/128), each followed by ReLU and per-clip batch normalization, then a
linear map to one (mu, logvar) pair per frame. Convolutions are expressed as
a single matmul over concatenated shifted copies of the input, so the whole
network stays inside the tape's primitive set.

Decoder: per-feature input projections for {f0, loudness, onset, z},
concatenated into the GRU input, then linear heads producing the synthesizer
controls. The harmonic indicator H is not a decoder input; it gates the
harmonic branch at render time. Decoded transient amplitude is multiplied by
the onset vector so onset-free frames stay silent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tape as tp
from .config import ModelConfig
from .errors import ConfigError, InputError
from .synth import SynthParams
from .tape import Tensor, as_tensor

LN10 = float(np.log(10.0))
BN_EPS = 1e-5


@dataclass
class LatentFrame:
    mu: Tensor
    logvar: Tensor
    z: Tensor


def exp_sigmoid(x) -> Tensor:
    """2 * sigmoid(x)^ln(10) + 1e-7: positive, saturating amplitude nonlinearity."""
    return tp.add(tp.mul(tp.powc(tp.sigmoid(x), LN10), 2.0), 1e-7)


def reparameterize(mu, logvar, eps) -> Tensor:
    """z = mu + eps * exp(0.5 * logvar); eps supplies the randomness."""
    mu, logvar = as_tensor(mu), as_tensor(logvar)
    if mu.shape != logvar.shape:
        raise InputError("mu and logvar shapes differ")
    sigma = tp.exp(tp.mul(logvar, 0.5))
    return tp.add(mu, tp.mul(Tensor(np.asarray(eps, dtype=np.float64)), sigma))


def _uniform_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Model:
    """Parameter registry plus the encode/decode computations."""

    def __init__(self, config: ModelConfig = ModelConfig(), seed: int = 0):
        self.config = config
        self.params: dict[str, Tensor] = {}
        rng = np.random.default_rng(seed)
        c = config

        chans = [c.n_mel, *c.conv_channels]
        for i in range(len(c.conv_channels)):
            cin, cout = chans[i], chans[i + 1]
            self._add(rng, f"enc{i}_w", (c.conv_kernel * cin, cout), fan_in=c.conv_kernel * cin)
            self._zeros(f"enc{i}_b", (cout,))
            self._const(f"enc{i}_gamma", np.ones(cout))
            self._zeros(f"enc{i}_beta", (cout,))
        last = c.conv_channels[-1]
        for head in ("mu", "logvar"):
            self._add(rng, f"enc_{head}_w", (last, 1), fan_in=last)
            self._zeros(f"enc_{head}_b", (1,))

        h = c.hidden_units
        quarter = h // 4
        for feat in ("f0", "loudness", "onset", "z"):
            self._add(rng, f"dec_{feat}_w", (1, quarter), fan_in=1)
            self._zeros(f"dec_{feat}_b", (quarter,))
        self._add(rng, "dec_ih_w", (h, 3 * h), fan_in=h)
        self._zeros("dec_ih_b", (3 * h,))
        self._add(rng, "dec_hh_w", (h, 3 * h), fan_in=h)
        self._zeros("dec_hh_b", (3 * h,))

        heads = {
            "amp": 1,
            "dist": c.n_harmonics,
            "noise": c.n_noise_bands,
            "freq": 1,
            "trans": 1,
        }
        for name, width in heads.items():
            self._add(rng, f"head_{name}_w", (h, width), fan_in=h)
            self._zeros(f"head_{name}_b", (width,))
        # start the noise branch quiet: if both branches open at equal level,
        # gradient descent fits tonal targets with the (linear, easier) noise
        # filter and the harmonic branch never takes over
        self.params["head_noise_b"].data -= 5.0

    def _add(self, rng, name, shape, fan_in):
        self.params[name] = Tensor(_uniform_init(rng, fan_in, shape), requires_grad=True)

    def _zeros(self, name, shape):
        self.params[name] = Tensor(np.zeros(shape), requires_grad=True)

    def _const(self, name, value):
        self.params[name] = Tensor(value, requires_grad=True)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    # -- encoder ------------------------------------------------------------

    def _conv_block(self, x: Tensor, index: int) -> Tensor:
        """[T, cin] -> [T, cout]: same-padded conv, ReLU, per-clip batch norm."""
        p = self.params
        t_frames, cin = x.shape
        k = self.config.conv_kernel
        half = k // 2
        padded = tp.concat(
            [Tensor(np.zeros((half, cin))), x, Tensor(np.zeros((half, cin)))], axis=0
        )
        shifted = tp.concat(
            [tp.getitem(padded, (slice(d, d + t_frames), slice(None))) for d in range(k)],
            axis=1,
        )
        y = tp.add(tp.matmul(shifted, p[f"enc{index}_w"]), p[f"enc{index}_b"])
        y = tp.relu(y)
        mean = tp.mean_(y, axis=0, keepdims=True)
        centered = tp.sub(y, mean)
        var = tp.mean_(tp.mul(centered, centered), axis=0, keepdims=True)
        normed = tp.mul(centered, tp.powc(tp.add(var, BN_EPS), -0.5))
        return tp.add(tp.mul(normed, p[f"enc{index}_gamma"]), p[f"enc{index}_beta"])

    def encode(self, mel) -> tuple[Tensor, Tensor]:
        """Mel magnitudes [bands, T] -> (mu [T], logvar [T])."""
        mag = np.asarray(getattr(mel, "magnitudes", mel), dtype=np.float64)
        if mag.ndim != 2 or mag.shape[0] != self.config.n_mel:
            raise ConfigError(f"expected mel shape [{self.config.n_mel}, T], got {mag.shape}")
        x = Tensor(mag.T.copy())
        for i in range(len(self.config.conv_channels)):
            x = self._conv_block(x, i)
        t_frames = x.shape[0]
        mu = tp.add(tp.matmul(x, self.params["enc_mu_w"]), self.params["enc_mu_b"])
        logvar = tp.add(tp.matmul(x, self.params["enc_logvar_w"]), self.params["enc_logvar_b"])
        return tp.reshape(mu, (t_frames,)), tp.reshape(logvar, (t_frames,))

    # -- decoder ------------------------------------------------------------

    def decode(self, ctrl, z=None) -> SynthParams:
        """ControlFrames (+ optional tape-tensor z override) -> SynthParams."""
        if z is None:
            if getattr(ctrl, "z", None) is None:
                raise InputError("decoder requires z; encode or supply a z override")
            z = Tensor(np.asarray(ctrl.z, dtype=np.float64))
        z = as_tensor(z)
        p = self.params
        t_frames = len(ctrl.f0)
        if z.shape != (t_frames,):
            raise InputError(f"z must have shape ({t_frames},)")

        # fixed input scalings keep features in comparable numeric ranges
        feats = {
            "f0": np.asarray(ctrl.f0, dtype=np.float64) / 1000.0,
            "loudness": np.asarray(ctrl.loudness, dtype=np.float64) / 40.0 + 1.0,
            "onset": np.asarray(ctrl.onset, dtype=np.float64),
        }
        cols = []
        for name in ("f0", "loudness", "onset"):
            col = Tensor(feats[name][:, None])
            cols.append(tp.relu(tp.add(tp.matmul(col, p[f"dec_{name}_w"]), p[f"dec_{name}_b"])))
        z_col = tp.reshape(z, (t_frames, 1))
        cols.append(tp.relu(tp.add(tp.matmul(z_col, p["dec_z_w"]), p["dec_z_b"])))
        xcat = tp.concat(cols, axis=1)

        xp = tp.add(tp.matmul(xcat, p["dec_ih_w"]), p["dec_ih_b"])
        h0 = Tensor(np.zeros(self.config.hidden_units))
        h_seq = tp.gru_sequence(xp, p["dec_hh_w"], p["dec_hh_b"], h0)

        def head(name):
            return tp.add(tp.matmul(h_seq, p[f"head_{name}_w"]), p[f"head_{name}_b"])

        amp = tp.reshape(exp_sigmoid(head("amp")), (t_frames,))
        dist = tp.softmax(head("dist"), axis=1)
        noise = exp_sigmoid(head("noise"))
        freq = tp.reshape(tp.mul(tp.sigmoid(head("freq")), 0.5), (t_frames,))
        onset = Tensor(feats["onset"])
        trans = tp.mul(tp.reshape(exp_sigmoid(head("trans")), (t_frames,)), onset)

        return SynthParams(
            f0=Tensor(np.asarray(ctrl.f0, dtype=np.float64)),
            harmonic_amp=amp,
            distribution=dist,
            noise_bands=noise,
            transient_freq=freq,
            transient_amp=trans,
            harmonic_gate=Tensor(np.asarray(ctrl.harmonic, dtype=np.float64)),
        )
