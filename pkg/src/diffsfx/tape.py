"""Reverse-mode automatic differentiation on numpy arrays.

A `Tensor` wraps a float64 ndarray. While a `Tape` is active, every primitive
records a backward rule; `Tape.backward(loss)` walks the records in exact
reverse order and accumulates gradients into `Tensor.grad`. With no tape
active the primitives are plain numpy computations, which is what inference
uses.

The primitive set is deliberately small but sufficient to express the whole
synthesis graph (oscillator banks, filter design, framing, spectra) and both
loss terms. Fixed linear operators (control upsampling, band interpolation)
enter through `linear_map`, whose backward is the exact transpose.
"""

from __future__ import annotations

import threading
from typing import Callable, Sequence

import numpy as np
import scipy.fft
import scipy.signal
import scipy.sparse

from .errors import NumericsError

_STATE = threading.local()


def _tape_stack() -> list:
    if not hasattr(_STATE, "stack"):
        _STATE.stack = []
    return _STATE.stack


def active_tape() -> "Tape | None":
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """Value node of the autodiff graph."""

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise NumericsError("tensor initialized with non-finite values")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def zero_grad(self) -> None:
        self.grad = None

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    # operator sugar; all routed through the recorded primitives
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return getitem(self, key)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class Tape:
    """Ordered operation record; backward traverses it in exact reverse.

    ``check_finite=True`` validates every op output (slow; used by tests and
    debugging). Leaf tensors are always validated on construction.
    """

    def __init__(self, check_finite: bool = False):
        self.records: list[tuple[Tensor, tuple[Tensor, ...], Callable]] = []
        self.check_finite = check_finite

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        popped = _tape_stack().pop()
        assert popped is self

    def record(self, out: Tensor, inputs: tuple[Tensor, ...], backward: Callable) -> None:
        if self.check_finite and not np.all(np.isfinite(out.data)):
            raise NumericsError("non-finite values produced during forward pass")
        self.records.append((out, inputs, backward))

    def backward(self, out: Tensor) -> None:
        """Accumulate d(out)/d(leaf) into `.grad` of every requires_grad tensor."""
        if out.data.ndim != 0:
            raise ValueError("backward expects a scalar output")
        grads: dict[int, np.ndarray] = {id(out): np.ones((), dtype=np.float64)}
        for node, inputs, backward in reversed(self.records):
            g_out = grads.pop(id(node), None)
            if g_out is None:
                continue
            if node.grad is None and node.requires_grad:
                node.grad = np.array(g_out, dtype=np.float64)
            elif node.requires_grad:
                node.grad = node.grad + g_out
            g_inputs = backward(g_out)
            for inp, g in zip(inputs, g_inputs):
                if g is None or not inp.requires_grad:
                    continue
                key = id(inp)
                if key in grads:
                    grads[key] = grads[key] + g
                else:
                    grads[key] = np.asarray(g, dtype=np.float64)
        # leaves (never an op output) still carry pending gradients
        for node, inputs, _ in self.records:
            for inp in inputs:
                g = grads.pop(id(inp), None)
                if g is not None and inp.requires_grad:
                    inp.grad = g if inp.grad is None else inp.grad + g


def _make(value: np.ndarray, inputs: Sequence, backward: Callable) -> Tensor:
    """Wrap an op result; record on the active tape when gradients can flow."""
    inputs = tuple(inputs)
    requires = any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.data = value
    out.requires_grad = requires
    out.grad = None
    tape = active_tape()
    if tape is not None and requires:
        tape.record(out, inputs, backward)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum gradient over axes that numpy broadcasting expanded."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# ---------------------------------------------------------------------------
# elementwise arithmetic


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data

    def backward(g):
        return (_unbroadcast(g, a.shape) if a.requires_grad else None,
                _unbroadcast(g, b.shape) if b.requires_grad else None)

    return _make(out, (a, b), backward)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data

    def backward(g):
        return (_unbroadcast(g, a.shape) if a.requires_grad else None,
                _unbroadcast(-g, b.shape) if b.requires_grad else None)

    return _make(out, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data

    def backward(g):
        return (_unbroadcast(g * b.data, a.shape) if a.requires_grad else None,
                _unbroadcast(g * a.data, b.shape) if b.requires_grad else None)

    return _make(out, (a, b), backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data

    def backward(g):
        ga = _unbroadcast(g / b.data, a.shape) if a.requires_grad else None
        gb = (_unbroadcast(-g * a.data / (b.data * b.data), b.shape)
              if b.requires_grad else None)
        return ga, gb

    return _make(out, (a, b), backward)


def neg(a) -> Tensor:
    a = as_tensor(a)
    return _make(-a.data, (a,), lambda g: (-g,))


# ---------------------------------------------------------------------------
# elementwise transcendental


def sin(a) -> Tensor:
    a = as_tensor(a)
    out = np.sin(a.data)

    def backward(g):
        return (g * np.cos(a.data),)

    return _make(out, (a,), backward)


def exp(a) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)

    def backward(g):
        return (g * out,)

    return _make(out, (a,), backward)


def log(a) -> Tensor:
    a = as_tensor(a)
    out = np.log(a.data)

    def backward(g):
        return (g / a.data,)

    return _make(out, (a,), backward)


def sigmoid(a) -> Tensor:
    a = as_tensor(a)
    out = 1.0 / (1.0 + np.exp(-a.data))

    def backward(g):
        return (g * out * (1.0 - out),)

    return _make(out, (a,), backward)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)

    def backward(g):
        return (g * (1.0 - out * out),)

    return _make(out, (a,), backward)


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = np.maximum(a.data, 0.0)

    def backward(g):
        return (g * (a.data > 0.0),)

    return _make(out, (a,), backward)


def powc(a, p: float) -> Tensor:
    """a ** p with constant exponent."""
    a = as_tensor(a)
    out = a.data ** p

    def backward(g):
        return (g * p * a.data ** (p - 1.0),)

    return _make(out, (a,), backward)


def absolute(a) -> Tensor:
    a = as_tensor(a)
    out = np.abs(a.data)

    def backward(g):
        return (g * np.sign(a.data),)

    return _make(out, (a,), backward)


# ---------------------------------------------------------------------------
# reductions, scans, shape


def sum_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _make(out, (a,), backward)


def mean_(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = a.data.mean(axis=axis, keepdims=keepdims)
    count = a.data.size if axis is None else a.data.shape[axis]

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g / count, a.shape).copy(),)

    return _make(out, (a,), backward)


def cumsum(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    out = np.cumsum(a.data, axis=axis)

    def backward(g):
        # transpose of lower-triangular ones: reversed cumulative sum
        return (np.flip(np.cumsum(np.flip(g, axis), axis=axis), axis),)

    return _make(out, (a,), backward)


def softmax(a, axis: int = -1) -> Tensor:
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - dot),)

    return _make(out, (a,), backward)


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out = a.data.reshape(shape)

    def backward(g):
        return (g.reshape(a.shape),)

    return _make(out, (a,), backward)


def getitem(a, key) -> Tensor:
    a = as_tensor(a)
    out = a.data[key]
    if np.isscalar(out) or out.ndim == 0:
        out = np.asarray(out, dtype=np.float64)
    else:
        out = np.ascontiguousarray(out)

    def backward(g):
        gz = np.zeros(a.shape, dtype=np.float64)
        np.add.at(gz, key, g)  # repeated fancy indices must accumulate
        return (gz,)

    return _make(out, (a,), backward)


def concat(parts: Sequence, axis: int = -1) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.data.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.ascontiguousarray(piece) for piece in np.split(g, splits, axis=axis))

    return _make(out, tuple(parts), backward)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    out = a.data @ b.data

    def backward(g):
        ga = g @ b.data.T if a.requires_grad else None
        gb = a.data.T @ g if b.requires_grad else None
        return ga, gb

    return _make(out, (a, b), backward)


def linear_map(op, a) -> Tensor:
    """Apply a fixed linear operator (scipy sparse or ndarray); backward is its transpose."""
    a = as_tensor(a)
    out = np.asarray(op @ a.data)

    def backward(g):
        return (np.asarray(op.T @ g),)

    return _make(out, (a,), backward)


# ---------------------------------------------------------------------------
# signal primitives


def frame_windows(a, size: int, hop: int) -> Tensor:
    """Slice a 1-D signal into overlapping frames [n_frames, size].

    Signals shorter than one frame yield a single zero-padded frame, so every
    spectral scale stays defined for miniature test instances.
    """
    a = as_tensor(a)
    n = a.data.shape[-1]
    if a.ndim != 1:
        raise ValueError("frame_windows expects a 1-D signal")
    if n < size:
        padded = np.zeros(size, dtype=np.float64)
        padded[:n] = a.data
        out = padded[None, :]
        starts = np.array([0])
    else:
        n_frames = 1 + (n - size) // hop
        starts = np.arange(n_frames) * hop
        out = np.lib.stride_tricks.sliding_window_view(a.data, size)[::hop].copy()

    def backward(g):
        gz = np.zeros(n, dtype=np.float64)
        for i, s in enumerate(starts):
            stop = min(s + size, n)
            gz[s:stop] += g[i, : stop - s]
        return (gz,)

    return _make(out, (a,), backward)


def rfft_magnitude(a, nfft: int) -> Tensor:
    """|rfft| along the last axis; zero-magnitude bins get zero gradient."""
    a = as_tensor(a)
    spec = np.fft.rfft(a.data, n=nfft, axis=-1)
    out = np.abs(spec)

    def backward(g):
        safe = np.where(out > 0.0, out, 1.0)
        gc = (g / safe) * spec
        if nfft % 2 == 0:
            gc[..., 1:-1] *= 0.5  # DC and Nyquist are self-conjugate
        else:
            gc[..., 1:] *= 0.5
        grad = nfft * np.fft.irfft(gc, n=nfft, axis=-1)
        return (grad[..., : a.shape[-1]],)

    return _make(out, (a,), backward)


def irfft_real(a, nfft: int) -> Tensor:
    """Inverse real FFT of a purely real (zero-phase) half spectrum."""
    a = as_tensor(a)
    out = np.fft.irfft(a.data, n=nfft, axis=-1)

    def backward(g):
        spec = np.fft.rfft(g, n=nfft, axis=-1).real
        w = np.full(a.shape[-1], 2.0)
        w[0] = 1.0
        if nfft % 2 == 0:
            w[-1] = 1.0
        return (spec * (w / nfft),)

    return _make(out, (a,), backward)


def dct3(a) -> Tensor:
    """Orthonormal DCT-III along the last axis (the inverse of orthonormal DCT-II)."""
    a = as_tensor(a)
    out = scipy.fft.idct(a.data, type=2, norm="ortho", axis=-1)

    def backward(g):
        # orthonormal transform: adjoint == inverse == forward DCT-II
        return (scipy.fft.dct(g, type=2, norm="ortho", axis=-1),)

    return _make(out, (a,), backward)


def conv_overlap_add(h, noise: np.ndarray, starts: np.ndarray, out_len: int) -> Tensor:
    """Convolve per-frame filters with fixed noise frames and overlap-add.

    h: [frames, taps] differentiable filters; noise: [frames, seg] constant
    excitation; starts[f] is the output index of conv result sample 0 (may be
    negative; out-of-range samples are dropped).
    """
    h = as_tensor(h)
    n_frames, taps = h.shape
    seg = noise.shape[-1]
    full = taps + seg - 1
    conv = scipy.signal.fftconvolve(h.data, noise, mode="full", axes=-1)
    idx = starts[:, None] + np.arange(full)[None, :]
    valid = (idx >= 0) & (idx < out_len)
    out = np.zeros(out_len, dtype=np.float64)
    np.add.at(out, idx[valid], conv[valid])

    def backward(g):
        gseg = np.zeros((n_frames, full), dtype=np.float64)
        gseg[valid] = g[idx[valid]]
        corr = scipy.signal.fftconvolve(gseg, noise[:, ::-1], mode="full", axes=-1)
        return (corr[:, seg - 1 : seg - 1 + taps],)

    return _make(out, (h,), backward)


def gru_sequence(xp, w_hh, b_hh, h0) -> Tensor:
    """Gated recurrent unit over a full sequence.

    xp: [T, 3H] precomputed input projections (order r, z, n); w_hh: [H, 3H];
    b_hh: [3H]; h0: [H]. Returns hidden states [T, H]. The time loop runs in
    the compiled kernel when available.
    """
    from .kernels import gru_backward, gru_forward

    xp, w_hh, b_hh, h0 = as_tensor(xp), as_tensor(w_hh), as_tensor(b_hh), as_tensor(h0)
    h_seq, stash = gru_forward(xp.data, w_hh.data, b_hh.data, h0.data)

    def backward(g):
        g_xp, g_whh, g_bhh, g_h0 = gru_backward(
            g, xp.data, w_hh.data, h0.data, h_seq, stash
        )
        return (g_xp, g_whh, g_bhh, g_h0)

    return _make(h_seq, (xp, w_hh, b_hh, h0), backward)


def build_upsample_operator(frame_count: int, frame_size: int) -> scipy.sparse.csr_matrix:
    """Sparse [n_samples, frame_count] linear-interpolation operator.

    Interpolates between frame centers and holds the end values, so a constant
    control vector maps to a constant signal.
    """
    n = frame_count * frame_size
    pos = (np.arange(n) - (frame_size - 1) / 2.0) / frame_size
    pos = np.clip(pos, 0.0, frame_count - 1.0)
    i0 = np.minimum(pos.astype(np.int64), frame_count - 2) if frame_count > 1 else np.zeros(n, np.int64)
    w = pos - i0
    rows = np.repeat(np.arange(n), 2)
    cols = np.stack([i0, np.minimum(i0 + 1, frame_count - 1)], axis=1).ravel()
    vals = np.stack([1.0 - w, w], axis=1).ravel()
    op = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, frame_count))
    op.sum_duplicates()
    return op
