"""Command-line interface, end to end on a tiny run."""

import json

import numpy as np
import pytest

from diffsfx.audio_io import read_wav, write_wav
from diffsfx.cli import main, parse_z
from diffsfx.config import FrameConfig, ModelConfig, RunConfig, TrainConfig
from diffsfx.errors import InputError

SR = 16000


def make_corpus(path, n=3):
    path.mkdir(exist_ok=True)
    t = np.arange(4 * SR) / SR
    rng = np.random.default_rng(0)
    for i in range(n):
        x = 0.4 * np.sin(2 * np.pi * (220 + 60 * i) * t) + 0.03 * rng.standard_normal(len(t))
        write_wav(path / f"c{i}.wav", np.clip(x, -1, 1), SR)


def tiny_config(path, steps=3):
    RunConfig(
        frames=FrameConfig(),
        model=ModelConfig(hidden_units=8, n_harmonics=4, n_noise_bands=4, conv_channels=(4,)),
        train=TrainConfig(batch_size=1, total_steps=steps, seed=0),
    ).save(path)


# --- parse_z -----------------------------------------------------------------


def test_parse_z_encoded():
    req = parse_z("encoded", 400)
    assert req.z_mode == "encoded"


def test_parse_z_constant():
    req = parse_z("1.25", 400)
    assert req.z_mode == "constant" and req.z_value == 1.25
    assert parse_z("-2", 400).z_value == -2.0


def test_parse_z_curve_file(tmp_path):
    path = tmp_path / "curve.txt"
    np.savetxt(path, np.linspace(-3, 3, 400))
    req = parse_z(str(path), 400)
    assert req.z_mode == "curve"
    assert len(req.z_curve) == 400
    assert abs(req.z_curve[0] + 3.0) < 1e-9


def test_parse_z_curve_resampled(tmp_path):
    path = tmp_path / "short.txt"
    np.savetxt(path, np.array([0.0, 2.0]))
    req = parse_z(str(path), 5)
    assert np.allclose(req.z_curve, [0.0, 0.5, 1.0, 1.5, 2.0])


def test_parse_z_rejects_nonsense():
    with pytest.raises(InputError):
        parse_z("no-such-file.txt", 400)


def test_parse_z_rejects_unparsable_file(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("this is not numeric\n")
    with pytest.raises(InputError):
        parse_z(str(path), 400)


# --- full pipeline -----------------------------------------------------------


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """preprocess -> train -> leave artifacts for the command tests."""
    tmp = tmp_path_factory.mktemp("cli")
    wavs = tmp / "wavs"
    cache = tmp / "cache"
    ckpt = tmp / "model.ckpt"
    config = tmp / "run.json"
    make_corpus(wavs)
    tiny_config(config)
    assert main(["preprocess", "--in", str(wavs), "--out", str(cache)]) == 0
    assert main(["train", "--config", str(config), "--cache", str(cache), "--out", str(ckpt)]) == 0
    return {"tmp": tmp, "wavs": wavs, "cache": cache, "ckpt": ckpt, "config": config}


def test_preprocess_artifacts(pipeline):
    cache = pipeline["cache"]
    assert len(list(cache.glob("*.feat"))) == 3
    assert (cache / "manifest.json").exists()


def test_train_artifacts(pipeline):
    ckpt = pipeline["ckpt"]
    assert ckpt.exists()
    log_path = pipeline["tmp"] / "model.ckpt.log.jsonl"
    assert log_path.exists()
    lines = [json.loads(line) for line in log_path.read_text().splitlines()]
    assert len(lines) == 3
    for i, row in enumerate(lines, start=1):
        assert row["step"] == i
        assert set(row) == {"step", "total", "reconstruction", "regularization", "beta", "lr"}


def test_synth_command_writes_wav(pipeline, tmp_path):
    out = tmp_path / "out.wav"
    code = main(
        [
            "synth",
            "--ckpt",
            str(pipeline["ckpt"]),
            "--in",
            str(pipeline["wavs"] / "c0.wav"),
            "--z",
            "0.5",
            "--seed",
            "4",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    samples, rate = read_wav(out)
    assert rate == SR and len(samples) == 64000


def test_synth_byte_identical_across_runs(pipeline, tmp_path):
    args = [
        "synth",
        "--ckpt",
        str(pipeline["ckpt"]),
        "--in",
        str(pipeline["wavs"] / "c1.wav"),
        "--z",
        "encoded",
        "--seed",
        "7",
    ]
    out_a = tmp_path / "a.wav"
    out_b = tmp_path / "b.wav"
    assert main(args + ["--out", str(out_a)]) == 0
    assert main(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_synth_with_curve_file(pipeline, tmp_path):
    curve = tmp_path / "curve.txt"
    np.savetxt(curve, np.linspace(-3, 3, 50))  # resampled to 400
    out = tmp_path / "curve_out.wav"
    code = main(
        [
            "synth",
            "--ckpt",
            str(pipeline["ckpt"]),
            "--in",
            str(pipeline["wavs"] / "c2.wav"),
            "--z",
            str(curve),
            "--out",
            str(out),
        ]
    )
    assert code == 0 and out.exists()


def test_eval_command_report(pipeline, tmp_path, capsys):
    gen = tmp_path / "gen"
    gen.mkdir()
    for src in pipeline["wavs"].glob("*.wav"):
        (gen / src.name).write_bytes(src.read_bytes())
    code = main(["eval", "--ref", str(pipeline["wavs"]), "--gen", str(gen)])
    assert code == 0
    report = capsys.readouterr().out
    lines = dict(
        line.split("=", 1) for line in report.strip().splitlines() if line.count("=") >= 1
    )
    assert lines["count"] == "3"
    assert float(lines["lsd_mean"]) == 0.0
    assert "pair.c0.wav.lsd" in lines


def test_eval_report_to_file(pipeline, tmp_path):
    gen = tmp_path / "gen"
    gen.mkdir()
    for src in pipeline["wavs"].glob("*.wav"):
        (gen / src.name).write_bytes(src.read_bytes())
    out = tmp_path / "report.txt"
    code = main(
        ["eval", "--ref", str(pipeline["wavs"]), "--gen", str(gen), "--out", str(out)]
    )
    assert code == 0
    assert "msstft_mean=0.0" in out.read_text()


def test_cli_reports_errors_as_exit_2(tmp_path, capsys):
    code = main(["synth", "--ckpt", "missing.ckpt", "--in", "x.wav", "--out", "y.wav"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_preprocess_empty_dir_fails(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["preprocess", "--in", str(empty), "--out", str(tmp_path / "c")]) == 2
