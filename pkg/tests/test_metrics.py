"""Evaluation metrics: spectral distances, Fréchet score, embedding files."""

import numpy as np
import pytest
import scipy.linalg

from diffsfx.audio_io import write_wav
from diffsfx.errors import InputError
from diffsfx.metrics import (
    EmbeddingSet,
    evaluate_corpus,
    frechet_distance,
    log_spectral_distance,
    msstft_distance,
    read_embeddings,
    write_embeddings,
)


def noise(seed, n=16000, amp=0.3):
    return amp * np.random.default_rng(seed).standard_normal(n)


# --- log-spectral distance ---------------------------------------------------


def test_lsd_zero_on_identical():
    x = noise(0)
    assert log_spectral_distance(x, x) == 0.0


def test_lsd_symmetric_and_nonnegative():
    for seed in range(5):
        x, y = noise(seed), noise(seed + 100)
        d_xy = log_spectral_distance(x, y)
        d_yx = log_spectral_distance(y, x)
        assert d_xy > 0.0
        assert abs(d_xy - d_yx) < 1e-12


def test_lsd_doubled_signal_is_log10_two():
    # |2X| / |X| = 2 on every bin, and broadband noise keeps all bins far
    # above the log epsilon, so the distance is log10(2) almost exactly
    x = noise(1)
    d = log_spectral_distance(x, 2.0 * x)
    assert abs(d - np.log10(2.0)) < 1e-3


def test_lsd_length_mismatch_raises():
    with pytest.raises(InputError):
        log_spectral_distance(np.zeros(100), np.zeros(101))


def test_msstft_distance_zero_and_positive():
    x = noise(2)
    assert msstft_distance(x, x) == 0.0
    assert msstft_distance(x, noise(3)) > 0.0


# --- Fréchet distance --------------------------------------------------------


def test_frechet_identical_sets_zero():
    v = np.random.default_rng(0).standard_normal((32, 6))
    d = frechet_distance(EmbeddingSet(v), EmbeddingSet(v.copy()))
    assert abs(d) < 1e-8


def test_frechet_1d_closed_form_mean_shift():
    # two-point sets with identical sample variance: d = (mu_a - mu_b)^2
    a = EmbeddingSet(np.array([[-1.0], [1.0]]))
    b = EmbeddingSet(np.array([[0.0], [2.0]]))
    assert abs(frechet_distance(a, b) - 1.0) < 1e-10


def test_frechet_1d_closed_form_spread():
    # mean 0 both; sigma^2 = 2 and 8: (sqrt(2) - sqrt(8))^2 = 2
    a = EmbeddingSet(np.array([[-1.0], [1.0]]))
    b = EmbeddingSet(np.array([[-2.0], [2.0]]))
    assert abs(frechet_distance(a, b) - 2.0) < 1e-10


def test_frechet_matches_sqrtm_oracle():
    rng = np.random.default_rng(4)
    a = rng.standard_normal((64, 8))
    b = rng.standard_normal((64, 8)) @ rng.standard_normal((8, 8)) * 0.5 + 0.3
    got = frechet_distance(EmbeddingSet(a), EmbeddingSet(b))

    mu_a, mu_b = a.mean(axis=0), b.mean(axis=0)
    cov_a = np.cov(a, rowvar=False)
    cov_b = np.cov(b, rowvar=False)
    cross = scipy.linalg.sqrtm(cov_a @ cov_b)
    want = float(
        (mu_a - mu_b) @ (mu_a - mu_b)
        + np.trace(cov_a)
        + np.trace(cov_b)
        - 2.0 * np.trace(cross.real)
    )
    assert abs(got - want) < 1e-8 * max(1.0, abs(want))


def test_frechet_symmetric():
    rng = np.random.default_rng(5)
    a = EmbeddingSet(rng.standard_normal((40, 5)))
    b = EmbeddingSet(rng.standard_normal((40, 5)) + 1.0)
    assert abs(frechet_distance(a, b) - frechet_distance(b, a)) < 1e-8


def test_frechet_dim_mismatch_raises():
    a = EmbeddingSet(np.zeros((4, 3)) + np.eye(4, 3))
    b = EmbeddingSet(np.eye(4, 5))
    with pytest.raises(InputError):
        frechet_distance(a, b)


def test_embedding_set_validation():
    with pytest.raises(InputError):
        EmbeddingSet(np.zeros((1, 4)))  # too few vectors
    with pytest.raises(InputError):
        EmbeddingSet(np.full((3, 4), np.nan))


# --- embedding file format ---------------------------------------------------


def test_embedding_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    v = rng.standard_normal((10, 7))
    path = tmp_path / "e.emb"
    write_embeddings(path, v)
    back = read_embeddings(path)
    assert back.vectors.shape == (10, 7)
    # stored as f32
    assert np.max(np.abs(back.vectors - v)) < 1e-6


def test_embedding_bad_magic_raises(tmp_path):
    path = tmp_path / "bad.emb"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(InputError):
        read_embeddings(path)


def test_embedding_truncated_raises(tmp_path):
    path = tmp_path / "t.emb"
    write_embeddings(path, np.ones((4, 4)))
    blob = path.read_bytes()
    path.write_bytes(blob[:-8])
    with pytest.raises(InputError):
        read_embeddings(path)


# --- corpus evaluation -------------------------------------------------------


def _write_clip(path, seed):
    write_wav(path, noise(seed, n=64000, amp=0.2), 16000)


def test_evaluate_corpus_identical_dirs(tmp_path):
    ref = tmp_path / "ref"
    gen = tmp_path / "gen"
    ref.mkdir()
    gen.mkdir()
    for i in range(2):
        _write_clip(ref / f"clip{i}.wav", i)
        (gen / f"clip{i}.wav").write_bytes((ref / f"clip{i}.wav").read_bytes())
    report = evaluate_corpus(ref, gen)
    assert report.count == 2
    assert report.skipped == []
    agg = report.aggregate()
    assert agg["lsd_mean"] == 0.0
    assert agg["msstft_mean"] == 0.0


def test_evaluate_corpus_skips_unpaired(tmp_path):
    ref = tmp_path / "ref"
    gen = tmp_path / "gen"
    ref.mkdir()
    gen.mkdir()
    _write_clip(ref / "a.wav", 0)
    _write_clip(ref / "only_ref.wav", 1)
    _write_clip(gen / "a.wav", 2)
    _write_clip(gen / "only_gen.wav", 3)
    report = evaluate_corpus(ref, gen)
    assert [p["name"] for p in report.pairs] == ["a.wav"]
    assert report.skipped == ["only_gen.wav", "only_ref.wav"]
    assert report.pairs[0]["lsd"] > 0.0


def test_evaluate_corpus_aggregate_means(tmp_path):
    ref = tmp_path / "ref"
    gen = tmp_path / "gen"
    ref.mkdir()
    gen.mkdir()
    for i in range(2):
        _write_clip(ref / f"c{i}.wav", i)
        _write_clip(gen / f"c{i}.wav", i + 50)
    report = evaluate_corpus(ref, gen)
    agg = report.aggregate()
    lsds = [p["lsd"] for p in report.pairs]
    assert abs(agg["lsd_mean"] - np.mean(lsds)) < 1e-12
    assert abs(agg["lsd_std"] - np.std(lsds)) < 1e-12


def test_evaluate_corpus_with_embeddings(tmp_path):
    ref = tmp_path / "ref"
    gen = tmp_path / "gen"
    ref.mkdir()
    gen.mkdir()
    _write_clip(ref / "a.wav", 0)
    (gen / "a.wav").write_bytes((ref / "a.wav").read_bytes())
    rng = np.random.default_rng(9)
    e1 = tmp_path / "ref.emb"
    e2 = tmp_path / "gen.emb"
    v = rng.standard_normal((16, 4))
    write_embeddings(e1, v)
    write_embeddings(e2, v)
    report = evaluate_corpus(ref, gen, emb_ref=e1, emb_gen=e2)
    assert report.frechet is not None
    assert abs(report.frechet) < 1e-6
