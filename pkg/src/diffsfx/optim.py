"""Adam optimizer over the model's named-parameter registry."""

from __future__ import annotations

import numpy as np

from .errors import NumericsError
from .tape import Tensor


class Adam:
    def __init__(self, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict[str, Tensor], lr: float) -> None:
        """One bias-corrected moment update; a missing gradient counts as zero."""
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for name in sorted(params):  # fixed order for reproducibility
            p = params[name]
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if not np.all(np.isfinite(g)):
                raise NumericsError(f"non-finite gradient for parameter '{name}'")
            m = self.m.setdefault(name, np.zeros_like(p.data))
            v = self.v.setdefault(name, np.zeros_like(p.data))
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            p.data = p.data - lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Moment buffers keyed for checkpointing."""
        out = {}
        for name, m in self.m.items():
            out[f"adam_m.{name}"] = m
            out[f"adam_v.{name}"] = self.v[name]
        return out

    def load_state(self, arrays: dict[str, np.ndarray], t: int) -> None:
        self.t = t
        for key, value in arrays.items():
            if key.startswith("adam_m."):
                self.m[key[len("adam_m.") :]] = value.astype(np.float64)
            elif key.startswith("adam_v."):
                self.v[key[len("adam_v.") :]] = value.astype(np.float64)
