"""Training schedules for the KL weight and the learning rate."""

from __future__ import annotations

from .config import TrainConfig
from .errors import InputError


def beta_schedule(step: int, cfg: TrainConfig) -> float:
    """KL weight: 0 until activation, then linear from beta_start to beta_end.

    Anchors: step 0 -> 0; activation step -> beta_start; ramp end -> beta_end,
    held constant afterwards.
    """
    if step < 0 or step > cfg.total_steps:
        raise InputError(f"step {step} outside [0, {cfg.total_steps}]")
    activate = cfg.beta_activate_at * cfg.total_steps
    ramp_end = cfg.beta_ramp_until * cfg.total_steps
    if step < activate:
        return 0.0
    if step >= ramp_end:
        return cfg.beta_end
    frac = (step - activate) / (ramp_end - activate)
    return cfg.beta_start + frac * (cfg.beta_end - cfg.beta_start)


def lr_schedule(step: int, cfg: TrainConfig) -> float:
    """Exponential decay from lr_start to lr_end, constant after the decay window."""
    if step < 0 or step > cfg.total_steps:
        raise InputError(f"step {step} outside [0, {cfg.total_steps}]")
    horizon = cfg.lr_decay_until * cfg.total_steps
    frac = min(step / horizon, 1.0) if horizon > 0 else 1.0
    return cfg.lr_start * (cfg.lr_end / cfg.lr_start) ** frac
