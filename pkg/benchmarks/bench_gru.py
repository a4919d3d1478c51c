"""Compare the compiled GRU kernel against the pure-numpy fallback.

Run:  python3 benchmarks/bench_gru.py [--hidden 512] [--frames 400] [--repeat 5]

The recurrence is the hot loop of every training step (it cannot be
vectorized across time), so this is where the compiled backend pays off.
"""

from __future__ import annotations

import argparse
import importlib
import time

import numpy as np


def load_backends():
    backends = {}
    from diffsfx.kernels import _gru_np

    backends["numpy"] = _gru_np
    try:
        _gru_cy = importlib.import_module("diffsfx.kernels._gru_cy")
        backends["cython"] = _gru_cy
    except ImportError:
        print("compiled kernel unavailable; benchmarking the fallback only")
    return backends


def bench(impl, hidden: int, frames: int, repeat: int, seed: int = 0) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    xp = rng.standard_normal((frames, 3 * hidden))
    w_hh = rng.standard_normal((hidden, 3 * hidden)) / np.sqrt(hidden)
    b_hh = rng.standard_normal(3 * hidden) * 0.01
    h0 = np.zeros(hidden)
    g = rng.standard_normal((frames, hidden))

    fwd_times, bwd_times = [], []
    for _ in range(repeat):
        t0 = time.perf_counter()
        h_seq, stash = impl.gru_forward(xp, w_hh, b_hh, h0)
        fwd_times.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        impl.gru_backward(g, xp, w_hh, h0, h_seq, stash)
        bwd_times.append(time.perf_counter() - t0)
    return min(fwd_times), min(bwd_times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hidden", type=int, default=512)
    parser.add_argument("--frames", type=int, default=400)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = load_backends()
    results = {}
    for name, impl in backends.items():
        fwd, bwd = bench(impl, args.hidden, args.frames, args.repeat)
        results[name] = (fwd, bwd)
        print(f"{name:>8}: forward {fwd * 1e3:8.2f} ms   backward {bwd * 1e3:8.2f} ms")

    # numerical agreement between the two implementations
    if len(backends) == 2:
        rng = np.random.default_rng(1)
        hidden = 32
        xp = rng.standard_normal((50, 3 * hidden))
        w_hh = rng.standard_normal((hidden, 3 * hidden)) / np.sqrt(hidden)
        b_hh = rng.standard_normal(3 * hidden) * 0.01
        h0 = rng.standard_normal(hidden)
        g = rng.standard_normal((50, hidden))
        outs = {}
        for name, impl in backends.items():
            h_seq, stash = impl.gru_forward(xp, w_hh, b_hh, h0)
            outs[name] = (h_seq, impl.gru_backward(g, xp, w_hh, h0, h_seq, stash))
        dh = np.max(np.abs(outs["numpy"][0] - outs["cython"][0]))
        dg = max(
            np.max(np.abs(a - b)) for a, b in zip(outs["numpy"][1], outs["cython"][1])
        )
        print(f"max |Δ| forward {dh:.3e}, backward {dg:.3e}")
        fwd_ratio = results["numpy"][0] / results["cython"][0]
        bwd_ratio = results["numpy"][1] / results["cython"][1]
        print(f"speedup: forward {fwd_ratio:.1f}x, backward {bwd_ratio:.1f}x")


if __name__ == "__main__":
    main()
