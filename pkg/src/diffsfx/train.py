"""Training loop: encode, reparameterize, decode, render, compare, step.

Each batch runs its clips sequentially through a fresh tape, scales every
per-clip loss by 1/batch so the accumulated gradients form the batch mean,
then applies one Adam update. All randomness (latent draws, noise excitation,
batch selection) derives from the configured seed, so a full run is
bit-reproducible.
"""

from __future__ import annotations

import json
from typing import Callable, Sequence

import numpy as np

from . import tape as tp
from .config import FrameConfig, TrainConfig
from .errors import NumericsError
from .losses import LossReport, kl_loss, multiscale_stft_loss
from .model import Model, reparameterize
from .optim import Adam
from .schedules import beta_schedule, lr_schedule
from .synth import render
from .tape import Tape, Tensor


def _clip_rng(seed: int, step: int, clip_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, step, clip_index)))


def train_step(
    model: Model,
    optimizer: Adam,
    batch: Sequence,
    step: int,
    cfg: TrainConfig,
    frame_cfg: FrameConfig,
) -> LossReport:
    """One optimization step over a batch of (samples, ControlFrames, MelSpec)."""
    beta = beta_schedule(step, cfg)
    lr = lr_schedule(step, cfg)
    model.zero_grad()

    rec_values = []
    reg_values = []
    for index, (samples, ctrl, mel) in enumerate(batch):
        rng = _clip_rng(cfg.seed, step, index)
        eps = rng.standard_normal(len(ctrl.f0))
        noise_seed = int(rng.integers(2**31))
        with Tape() as tape:
            mu, logvar = model.encode(mel)
            z = reparameterize(mu, logvar, eps)
            params = model.decode(ctrl, z=z)
            wav = render(params, frame_cfg, seed=noise_seed)
            l_rec = multiscale_stft_loss(wav, Tensor(np.asarray(samples, dtype=np.float64)))
            l_reg = kl_loss(mu, logvar)
            loss = tp.add(l_rec, tp.mul(l_reg, beta))
            if not np.isfinite(loss.item()):
                raise NumericsError(f"non-finite loss at step {step}")
            tape.backward(tp.mul(loss, 1.0 / len(batch)))
        rec_values.append(l_rec.item())
        reg_values.append(l_reg.item())

    optimizer.step(model.params, lr)
    return LossReport.from_parts(
        float(np.mean(rec_values)), float(np.mean(reg_values)), beta, step
    )


def fit(
    model: Model,
    data: Sequence,
    cfg: TrainConfig,
    frame_cfg: FrameConfig = FrameConfig(),
    log_path=None,
    checkpoint_fn: Callable[[int], str] | None = None,
    checkpoint_every: int = 0,
    progress_fn: Callable[[LossReport], None] | None = None,
) -> list[LossReport]:
    """Run cfg.total_steps optimization steps over the dataset.

    data: sequence of (samples, ControlFrames, MelSpec) records. Batches are
    drawn deterministically from cfg.seed. checkpoint_fn(step) persists state
    and returns a path; on a numeric failure the abort message names the last
    successful checkpoint so the run can resume from it.
    """
    optimizer = Adam()
    picker = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xBA7C4)))
    history: list[LossReport] = []
    last_checkpoint = None

    log_handle = open(log_path, "w") if log_path else None
    try:
        for step in range(1, cfg.total_steps + 1):
            replace = len(data) < cfg.batch_size
            chosen = picker.choice(len(data), size=cfg.batch_size, replace=replace)
            batch = [data[i] for i in chosen]
            try:
                report = train_step(model, optimizer, batch, step, cfg, frame_cfg)
            except NumericsError as exc:
                where = f"last good checkpoint: {last_checkpoint}" if last_checkpoint else "no checkpoint saved yet"
                raise NumericsError(f"{exc}; {where}") from exc
            history.append(report)
            if log_handle:
                log_handle.write(
                    json.dumps(
                        {
                            "step": report.step,
                            "total": report.total,
                            "reconstruction": report.reconstruction,
                            "regularization": report.regularization,
                            "beta": report.beta,
                            "lr": lr_schedule(step, cfg),
                        }
                    )
                    + "\n"
                )
                log_handle.flush()
            if progress_fn:
                progress_fn(report)
            if checkpoint_fn and checkpoint_every and step % checkpoint_every == 0:
                last_checkpoint = checkpoint_fn(step)
    finally:
        if log_handle:
            log_handle.close()
    return history
