"""Training-loop contracts on a miniature problem: identity, determinism, descent."""

import json

import numpy as np

from diffsfx.config import FrameConfig, ModelConfig, TrainConfig
from diffsfx.features import ControlFrames
from diffsfx.model import Model
from diffsfx.optim import Adam
from diffsfx.train import fit, train_step

MINI_FRAME = FrameConfig(frame_size=32, frame_count=8, sample_rate=16000)


def mini_record(seed=0):
    """A tiny synthetic clip with matching handcrafted features."""
    rng = np.random.default_rng(seed)
    t = MINI_FRAME.frame_count
    n = MINI_FRAME.n_samples
    samples = 0.5 * np.sin(2.0 * np.pi * 500.0 * np.arange(n) / MINI_FRAME.sample_rate)
    onset = np.zeros(t)
    onset[4] = 0.8
    ctrl = ControlFrames(
        f0=np.full(t, 500.0),
        loudness=np.full(t, -12.0),
        onset=onset,
        harmonic=np.full(t, 0.9),
    )
    mel = np.abs(rng.normal(size=(128, t)))
    return samples, ctrl, mel


def mini_model(seed=0):
    return Model(ModelConfig(hidden_units=8), seed=seed)


def test_report_identity_and_beta_gate():
    model = mini_model()
    opt = Adam()
    record = mini_record()
    cfg = TrainConfig(batch_size=1, total_steps=100, seed=0)

    early = train_step(model, opt, [record], step=5, cfg=cfg, frame_cfg=MINI_FRAME)
    assert early.beta == 0.0
    assert early.total == early.reconstruction  # exact: beta is identically zero

    late = train_step(model, opt, [record], step=90, cfg=cfg, frame_cfg=MINI_FRAME)
    assert late.beta == 1000.0
    assert late.total == late.reconstruction + late.beta * late.regularization


def test_training_is_bit_reproducible():
    def run():
        model = mini_model(seed=3)
        cfg = TrainConfig(batch_size=2, total_steps=5, seed=11)
        fit(model, [mini_record(0), mini_record(1)], cfg, MINI_FRAME)
        return {k: v.data.copy() for k, v in model.params.items()}

    a, b = run(), run()
    for name in a:
        assert np.array_equal(a[name], b[name]), name


def test_fit_descends_on_single_clip():
    model = mini_model(seed=1)
    cfg = TrainConfig(
        batch_size=1, total_steps=40, lr_start=3e-3, lr_end=3e-3, seed=2
    )
    history = fit(model, [mini_record()], cfg, MINI_FRAME)
    first = history[0].reconstruction
    tail = np.mean([h.reconstruction for h in history[-5:]])
    assert tail < first


def test_fit_writes_structured_log(tmp_path):
    model = mini_model(seed=4)
    cfg = TrainConfig(batch_size=1, total_steps=3, seed=5)
    log = tmp_path / "train.jsonl"
    history = fit(model, [mini_record()], cfg, MINI_FRAME, log_path=str(log))
    lines = [json.loads(line) for line in log.read_text().splitlines()]
    assert len(lines) == 3 == len(history)
    for i, rec in enumerate(lines):
        assert rec["step"] == i + 1
        for key in ("total", "reconstruction", "regularization", "beta", "lr"):
            assert key in rec
        assert abs(rec["total"] - (rec["reconstruction"] + rec["beta"] * rec["regularization"])) <= 1e-9 * max(1.0, abs(rec["total"]))


def test_checkpoint_callback_invoked(tmp_path):
    model = mini_model(seed=6)
    cfg = TrainConfig(batch_size=1, total_steps=4, seed=7)
    saved = []

    def save(step):
        path = str(tmp_path / f"ck_{step}")
        saved.append(step)
        return path

    fit(model, [mini_record()], cfg, MINI_FRAME, checkpoint_fn=save, checkpoint_every=2)
    assert saved == [2, 4]
