"""Checkpoint save/load."""

import numpy as np
import pytest

from diffsfx.checkpoint import CKPT_MAGIC, load_checkpoint, save_checkpoint
from diffsfx.config import FrameConfig, ModelConfig, RunConfig, TrainConfig
from diffsfx.errors import CheckpointError
from diffsfx.model import Model
from diffsfx.optim import Adam


def tiny_run_config(seed=3):
    return RunConfig(
        frames=FrameConfig(frame_size=32, frame_count=8),
        model=ModelConfig(hidden_units=8, n_harmonics=4, n_noise_bands=4, conv_channels=(4,)),
        train=TrainConfig.desk_scale(steps=10, seed=seed),
    )


def test_roundtrip_restores_weights(tmp_path):
    config = tiny_run_config()
    model = Model(config.model, seed=7)
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, model, config, step=42)
    loaded = load_checkpoint(path)
    assert loaded.step == 42
    assert loaded.seed == config.train.seed
    assert loaded.config.frames == config.frames
    assert loaded.config.model == config.model
    assert loaded.config.train == config.train
    assert set(loaded.model.params) == set(model.params)
    for name, p in model.params.items():
        want = p.data.astype(np.float32).astype(np.float64)  # f32 storage
        assert np.array_equal(loaded.model.params[name].data, want)


def test_magic_and_header(tmp_path):
    config = tiny_run_config()
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, Model(config.model), config, step=1)
    assert path.read_bytes()[:4] == CKPT_MAGIC


def test_rejects_non_checkpoint(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"WAVEnot a checkpoint")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_rejects_truncation(tmp_path):
    config = tiny_run_config()
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, Model(config.model), config, step=1)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) - 64])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_rejects_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "absent.ckpt")


def test_optimizer_state_roundtrip(tmp_path):
    config = tiny_run_config()
    model = Model(config.model, seed=1)
    optimizer = Adam()
    # populate moments with one fake step
    for p in model.params.values():
        p.grad = np.full_like(p.data, 0.5)
    optimizer.step(model.params, lr=1e-3)

    path = tmp_path / "opt.ckpt"
    save_checkpoint(path, model, config, step=1, optimizer=optimizer)
    loaded = load_checkpoint(path, with_optimizer=True)
    assert loaded.optimizer is not None
    assert loaded.optimizer.t == 1
    for name in model.params:
        want = optimizer.m[name].astype(np.float32).astype(np.float64)
        assert np.array_equal(loaded.optimizer.m[name], want)


def test_no_optimizer_when_not_requested(tmp_path):
    config = tiny_run_config()
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, Model(config.model), config, step=1)
    loaded = load_checkpoint(path, with_optimizer=True)
    assert loaded.optimizer is None
