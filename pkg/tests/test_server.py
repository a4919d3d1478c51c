"""HTTP service endpoints."""

import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

import diffsfx
from diffsfx.audio_io import read_wav, wav_bytes
from diffsfx.checkpoint import load_checkpoint, save_checkpoint
from diffsfx.config import FrameConfig, ModelConfig, RunConfig, TrainConfig
from diffsfx.model import Model
from diffsfx.server import create_app

FRAMES = FrameConfig()  # service contract is the full 400-frame clip


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("server")
    config = RunConfig(
        frames=FRAMES,
        model=ModelConfig(hidden_units=8, n_harmonics=4, n_noise_bands=4, conv_channels=(4,)),
        train=TrainConfig.desk_scale(steps=10, seed=0),
    )
    path = tmp / "m.ckpt"
    save_checkpoint(path, Model(config.model, seed=0), config, step=10)
    app = create_app(load_checkpoint(path))
    with TestClient(app) as c:
        yield c


def tone_wav_bytes(freq=440.0, seconds=4.0):
    t = np.arange(int(seconds * FRAMES.sample_rate)) / FRAMES.sample_rate
    return wav_bytes(0.4 * np.sin(2 * np.pi * freq * t), FRAMES.sample_rate)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"] == diffsfx.__version__


def test_model_info(client):
    r = client.get("/model")
    assert r.status_code == 200
    body = r.json()
    assert body["frames"]["frame_count"] == 400
    assert body["frames"]["n_samples"] == 64000
    assert body["frames"]["sample_rate"] == 16000
    assert body["model"]["hidden_units"] == 8
    assert body["step"] == 10


def test_analyze_four_second_wav(client):
    r = client.post("/analyze", content=tone_wav_bytes())
    assert r.status_code == 200
    body = r.json()
    assert sorted(body) == ["f0", "harmonic", "loudness", "onset"]
    for key in body:
        assert len(body[key]) == 400
    assert all(0.0 < h < 1.0 for h in body["harmonic"])


def test_analyze_short_wav_still_400_frames(client):
    r = client.post("/analyze", content=tone_wav_bytes(seconds=1.0))
    assert r.status_code == 200
    assert len(r.json()["f0"]) == 400


def test_analyze_empty_body(client):
    r = client.post("/analyze", content=b"")
    assert r.status_code == 400


def test_analyze_garbage(client):
    r = client.post("/analyze", content=b"definitely not a wav file")
    assert r.status_code == 400


def test_synthesize_from_wav_constant_z(client):
    payload = {
        "wav_base64": base64.b64encode(tone_wav_bytes()).decode(),
        "z_mode": "constant",
        "z_value": 0.5,
        "seed": 1,
    }
    r = client.post("/synthesize", json=payload)
    assert r.status_code == 200
    assert r.headers["content-type"].startswith("audio/wav")
    samples, rate = read_wav(r.content)
    assert rate == 16000
    assert len(samples) == 64000


def test_synthesize_encoded_from_wav(client):
    payload = {"wav_base64": base64.b64encode(tone_wav_bytes()).decode(), "z_mode": "encoded"}
    r = client.post("/synthesize", json=payload)
    assert r.status_code == 200


def test_synthesize_deterministic(client):
    payload = {
        "wav_base64": base64.b64encode(tone_wav_bytes()).decode(),
        "z_mode": "constant",
        "z_value": 1.0,
        "seed": 9,
    }
    a = client.post("/synthesize", json=payload)
    b = client.post("/synthesize", json=payload)
    assert a.content == b.content


def _features_payload(client):
    return client.post("/analyze", content=tone_wav_bytes()).json()


def test_synthesize_from_features(client):
    payload = {"features": _features_payload(client), "z_mode": "constant", "z_value": 0.0}
    r = client.post("/synthesize", json=payload)
    assert r.status_code == 200
    samples, _ = read_wav(r.content)
    assert len(samples) == 64000


def test_synthesize_curve(client):
    payload = {
        "features": _features_payload(client),
        "z_mode": "curve",
        "z_curve": np.linspace(-3, 3, 400).tolist(),
    }
    r = client.post("/synthesize", json=payload)
    assert r.status_code == 200


def test_synthesize_encoded_with_features_only_is_400(client):
    payload = {"features": _features_payload(client), "z_mode": "encoded"}
    r = client.post("/synthesize", json=payload)
    assert r.status_code == 400


def test_synthesize_needs_some_source(client):
    r = client.post("/synthesize", json={"z_mode": "constant", "z_value": 0.0})
    assert r.status_code == 400


def test_synthesize_bad_curve_length(client):
    payload = {
        "features": _features_payload(client),
        "z_mode": "curve",
        "z_curve": [0.0, 1.0, 2.0],
    }
    r = client.post("/synthesize", json=payload)
    assert r.status_code == 400


def test_synthesize_bad_base64(client):
    r = client.post(
        "/synthesize", json={"wav_base64": "!!!not-base64!!!", "z_mode": "constant"}
    )
    assert r.status_code == 400


def test_static_dir_mount(tmp_path):
    config = RunConfig(
        frames=FrameConfig(frame_size=32, frame_count=8),
        model=ModelConfig(hidden_units=8, n_harmonics=4, n_noise_bands=4, conv_channels=(4,)),
        train=TrainConfig.desk_scale(steps=10),
    )
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, Model(config.model, seed=0), config, step=1)
    static = tmp_path / "static"
    static.mkdir()
    (static / "index.html").write_text("<html><body>ui</body></html>")
    app = create_app(load_checkpoint(path), static_dir=static)
    with TestClient(app) as client:
        r = client.get("/")
        assert r.status_code == 200
        assert "ui" in r.text
        # API routes still take precedence over the mount
        assert client.get("/health").status_code == 200
