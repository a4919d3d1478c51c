"""Encoder/decoder contracts: shapes, nonlinearity ranges, determinism."""

import numpy as np
import pytest

from diffsfx.config import ModelConfig
from diffsfx.errors import InputError
from diffsfx.features import ControlFrames
from diffsfx.model import LN10, Model, exp_sigmoid, reparameterize
from diffsfx.tape import Tape, Tensor


def tiny_model(hidden=8, seed=0):
    return Model(ModelConfig(hidden_units=hidden), seed=seed)


def fake_ctrl(t=400, with_z=False, seed=0):
    rng = np.random.default_rng(seed)
    onset = np.zeros(t)
    onset[rng.integers(5, t - 5, size=3)] = rng.uniform(0.3, 1.0, size=3)
    return ControlFrames(
        f0=rng.uniform(100.0, 900.0, t),
        loudness=rng.uniform(-60.0, -10.0, t),
        onset=onset,
        harmonic=rng.uniform(0.05, 0.95, t),
        z=rng.normal(size=t) if with_z else None,
    )


def fake_mel(t=400, seed=1):
    rng = np.random.default_rng(seed)
    return np.abs(rng.normal(size=(128, t)))


# ---------------------------------------------------------------------------
# encoder


def test_encode_output_shapes():
    model = tiny_model()
    mu, logvar = model.encode(fake_mel())
    assert mu.shape == (400,)
    assert logvar.shape == (400,)


def test_encode_zero_weights_yields_bias():
    model = tiny_model()
    for name, p in model.params.items():
        if name.startswith("enc"):
            p.data = np.zeros_like(p.data)
    model.params["enc_mu_b"].data = np.array([0.3])
    model.params["enc_logvar_b"].data = np.array([-0.2])
    mu, logvar = model.encode(fake_mel())
    assert np.allclose(mu.data, 0.3)
    assert np.allclose(logvar.data, -0.2)


def test_encode_deterministic():
    model = tiny_model()
    mel = fake_mel()
    a, _ = model.encode(mel)
    b, _ = model.encode(mel)
    assert np.array_equal(a.data, b.data)


def test_encode_rejects_wrong_band_count():
    model = tiny_model()
    with pytest.raises(Exception):
        model.encode(np.abs(np.random.default_rng(0).normal(size=(64, 400))))


# ---------------------------------------------------------------------------
# reparameterization


def test_reparameterize_zero_eps_is_mu():
    mu = np.array([0.1, -2.0, 3.5])
    z = reparameterize(mu, np.array([0.3, -1.0, 2.0]), np.zeros(3))
    assert np.array_equal(z.data, mu)


def test_reparameterize_unit_sigma_shift():
    z = reparameterize(np.zeros(4), np.zeros(4), np.ones(4))
    assert np.allclose(z.data, 1.0)


def test_reparameterize_monte_carlo_std():
    rng = np.random.default_rng(2)
    eps = rng.standard_normal(100_000)
    z = reparameterize(np.zeros(100_000), np.zeros(100_000), eps)
    assert abs(np.std(z.data) - 1.0) < 0.02


# ---------------------------------------------------------------------------
# decoder


def test_decode_output_ranges():
    model = tiny_model()
    params = model.decode(fake_ctrl(with_z=True))
    t = 400
    assert params.harmonic_amp.shape == (t,)
    assert np.all(params.harmonic_amp.data > 0.0)
    assert params.distribution.shape == (t, 100)
    assert np.allclose(params.distribution.data.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(params.noise_bands.data > 0.0)
    assert np.all((params.transient_freq.data > 0.0) & (params.transient_freq.data < 0.5))
    assert np.all(params.transient_amp.data >= 0.0)


def test_decode_missing_z_rejected():
    model = tiny_model()
    with pytest.raises(InputError):
        model.decode(fake_ctrl(with_z=False))


def test_decode_zero_onset_silences_transients():
    model = tiny_model()
    ctrl = fake_ctrl(with_z=True)
    ctrl.onset = np.zeros_like(ctrl.onset)
    params = model.decode(ctrl)
    assert np.all(params.transient_amp.data == 0.0)


def test_decode_deterministic_across_calls():
    model = tiny_model()
    ctrl = fake_ctrl(with_z=True)
    a = model.decode(ctrl)
    b = model.decode(ctrl)
    for name in ("harmonic_amp", "distribution", "noise_bands", "transient_freq"):
        assert np.array_equal(getattr(a, name).data, getattr(b, name).data)


def test_decode_passes_through_f0_and_gate():
    model = tiny_model()
    ctrl = fake_ctrl(with_z=True)
    params = model.decode(ctrl)
    assert np.array_equal(params.f0.data, ctrl.f0)
    assert np.array_equal(params.harmonic_gate.data, ctrl.harmonic)


def test_exp_sigmoid_floor_and_ceiling():
    lo = exp_sigmoid(Tensor(np.array(-40.0))).item()
    hi = exp_sigmoid(Tensor(np.array(40.0))).item()
    assert abs(lo - 1e-7) < 1e-12
    assert abs(hi - (2.0 + 1e-7)) < 1e-9
    mid = exp_sigmoid(Tensor(np.array(0.0))).item()
    assert abs(mid - (2.0 * 0.5**LN10 + 1e-7)) < 1e-12


def test_gradients_reach_every_decoder_parameter():
    model = tiny_model()
    ctrl = fake_ctrl(t=40, with_z=True)
    with Tape() as tape:
        out = model.decode(ctrl)
        from diffsfx import tape as tp

        score = tp.sum_(out.harmonic_amp)
        score = tp.add(score, tp.sum_(out.distribution))
        score = tp.add(score, tp.sum_(out.noise_bands))
        score = tp.add(score, tp.sum_(out.transient_freq))
        score = tp.add(score, tp.sum_(out.transient_amp))
        tape.backward(score)
    for name, p in model.params.items():
        if name.startswith("dec") or name.startswith("head"):
            assert p.grad is not None and np.any(p.grad != 0.0), name
