"""Objective evaluation: log-spectral distance, multi-scale spectral distance,
and the Fréchet distance between embedding-set Gaussian statistics."""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from .audio_io import ingest
from .config import FrameConfig
from .errors import InputError, NumericsError
from .losses import FFT_SIZES, multiscale_stft_loss

LOG_EPS = 1e-7
EMB_MAGIC = b"EMB1"


@dataclass
class EmbeddingSet:
    vectors: np.ndarray  # [M, D]
    label: str = ""

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] < 2:
            raise InputError("embedding set needs at least 2 vectors [M, D]")
        if not np.all(np.isfinite(self.vectors)):
            raise InputError("embedding set contains non-finite values")


@dataclass
class MetricReport:
    pairs: list = field(default_factory=list)  # {"name", "lsd", "msstft"}
    skipped: list = field(default_factory=list)
    frechet: float | None = None

    @property
    def count(self) -> int:
        return len(self.pairs)

    def aggregate(self) -> dict:
        out = {"count": self.count, "skipped": len(self.skipped)}
        for key in ("lsd", "msstft"):
            values = [p[key] for p in self.pairs]
            out[f"{key}_mean"] = float(np.mean(values)) if values else float("nan")
            out[f"{key}_std"] = float(np.std(values)) if values else float("nan")
        if self.frechet is not None:
            out["frechet"] = self.frechet
        return out


def _magnitude_frames(x: np.ndarray, size: int) -> np.ndarray:
    hop = size // 4
    if len(x) < size:
        frames = np.zeros((1, size))
        frames[0, : len(x)] = x
    else:
        frames = np.lib.stride_tricks.sliding_window_view(x, size)[::hop]
    window = scipy.signal.windows.hann(size, sym=False)
    return np.abs(np.fft.rfft(frames * window[None, :], axis=1))


def log_spectral_distance(x, y, sizes=FFT_SIZES) -> float:
    """Mean over FFT sizes of the rms log10-magnitude difference."""
    x = np.asarray(getattr(x, "samples", x), dtype=np.float64)
    y = np.asarray(getattr(y, "samples", y), dtype=np.float64)
    if x.shape != y.shape:
        raise InputError("signals must have equal length")
    values = []
    for size in sizes:
        lx = np.log10(_magnitude_frames(x, size) + LOG_EPS)
        ly = np.log10(_magnitude_frames(y, size) + LOG_EPS)
        values.append(np.sqrt(np.mean((lx - ly) ** 2)))
    return float(np.mean(values))


def msstft_distance(x, y) -> float:
    """The training reconstruction loss evaluated as a plain metric."""
    x = np.asarray(getattr(x, "samples", x), dtype=np.float64)
    y = np.asarray(getattr(y, "samples", y), dtype=np.float64)
    return float(multiscale_stft_loss(x, y).item())


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((m + m.T) / 2.0)
    if np.any(vals < -1e-8 * max(1.0, np.abs(vals).max())):
        raise NumericsError("covariance is not positive semidefinite")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: EmbeddingSet, b: EmbeddingSet) -> float:
    """||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa Sb)^{1/2}).

    The cross term is computed from the eigenvalues of the symmetrized
    product sqrt(Sa) Sb sqrt(Sa); tiny negative eigenvalues from rounding
    are clamped to zero.
    """
    if a.vectors.shape[1] != b.vectors.shape[1]:
        raise InputError("embedding dimensions differ")
    mu_a = a.vectors.mean(axis=0)
    mu_b = b.vectors.mean(axis=0)
    cov_a = np.atleast_2d(np.cov(a.vectors, rowvar=False))
    cov_b = np.atleast_2d(np.cov(b.vectors, rowvar=False))

    root_a = _psd_sqrt(cov_a)
    product = root_a @ cov_b @ root_a
    vals = np.linalg.eigvalsh((product + product.T) / 2.0)
    if not np.all(np.isfinite(vals)):
        raise NumericsError("matrix square root did not converge")
    vals = np.where(vals > -1e-8, np.clip(vals, 0.0, None), vals)
    if np.any(vals < 0.0):
        raise NumericsError("product matrix has significantly negative spectrum")
    trace_sqrt = np.sum(np.sqrt(vals))

    diff = mu_a - mu_b
    value = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * trace_sqrt)
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# embedding file format: magic, u32 count, u32 dim, little-endian f32 data


def write_embeddings(path, vectors: np.ndarray) -> None:
    vectors = np.asarray(vectors, dtype=np.float32)
    if vectors.ndim != 2:
        raise InputError("embeddings must be [M, D]")
    with open(path, "wb") as fh:
        fh.write(EMB_MAGIC)
        fh.write(struct.pack("<II", vectors.shape[0], vectors.shape[1]))
        fh.write(vectors.astype("<f4").tobytes())


def read_embeddings(path, label: str = "") -> EmbeddingSet:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != EMB_MAGIC:
            raise InputError(f"'{path}' is not an embedding file")
        m, d = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(m * d * 4), dtype="<f4")
    if data.size != m * d:
        raise InputError(f"'{path}' is truncated")
    return EmbeddingSet(vectors=data.reshape(m, d).astype(np.float64), label=label or str(path))


def evaluate_corpus(
    ref_dir, gen_dir, emb_ref=None, emb_gen=None, cfg: FrameConfig = FrameConfig()
) -> MetricReport:
    """Pair WAV files by name and compute per-pair and aggregate distances."""
    ref_names = {f for f in os.listdir(ref_dir) if f.lower().endswith(".wav")}
    gen_names = {f for f in os.listdir(gen_dir) if f.lower().endswith(".wav")}
    report = MetricReport()
    report.skipped = sorted(ref_names ^ gen_names)
    for name in sorted(ref_names & gen_names):
        ref = ingest(os.path.join(ref_dir, name), cfg).samples
        gen = ingest(os.path.join(gen_dir, name), cfg).samples
        report.pairs.append(
            {
                "name": name,
                "lsd": log_spectral_distance(ref, gen),
                "msstft": msstft_distance(ref, gen),
            }
        )
    if emb_ref is not None and emb_gen is not None:
        report.frechet = frechet_distance(
            read_embeddings(emb_ref, "ref"), read_embeddings(emb_gen, "gen")
        )
    return report
