"""HTTP service exposing analysis and synthesis over a fixed checkpoint.

The model is loaded once and never mutated, so concurrent requests are safe
and give the same results as serial execution. Payloads stay small: feature
vectors travel as JSON arrays, audio as WAV bytes (base64 inside JSON for
the synthesize request body).
"""

from __future__ import annotations

import base64

import numpy as np
from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .audio_io import ingest, wav_bytes
from .checkpoint import LoadedCheckpoint, load_checkpoint
from .errors import DiffsfxError, InputError
from .features import ControlFrames, analyze
from .synthesis import SynthesisRequest, synthesize


class FeaturePayload(BaseModel):
    f0: list[float]
    loudness: list[float]
    onset: list[float]
    harmonic: list[float]


class SynthesizePayload(BaseModel):
    features: FeaturePayload | None = None
    wav_base64: str | None = None
    z_mode: str = "encoded"
    z_value: float = 0.0
    z_curve: list[float] | None = None
    seed: int = 0


def _control_json(ctrl: ControlFrames) -> dict:
    return {
        "f0": ctrl.f0.tolist(),
        "loudness": ctrl.loudness.tolist(),
        "onset": ctrl.onset.tolist(),
        "harmonic": ctrl.harmonic.tolist(),
    }


def create_app(ckpt: LoadedCheckpoint, static_dir=None) -> FastAPI:
    app = FastAPI(title="diffsfx", version=__version__)
    cfg = ckpt.config.frames

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/model")
    def model_info():
        return {
            "step": ckpt.step,
            "seed": ckpt.seed,
            "frames": {
                "frame_size": cfg.frame_size,
                "frame_count": cfg.frame_count,
                "sample_rate": cfg.sample_rate,
                "n_samples": cfg.n_samples,
            },
            "model": {
                "hidden_units": ckpt.config.model.hidden_units,
                "n_harmonics": ckpt.config.model.n_harmonics,
                "n_noise_bands": ckpt.config.model.n_noise_bands,
                "n_mel": ckpt.config.model.n_mel,
            },
        }

    @app.post("/analyze")
    async def analyze_clip(request: Request):
        body = await request.body()
        if not body:
            raise HTTPException(status_code=400, detail="empty request body")
        try:
            clip = ingest(body, cfg)
            ctrl, _ = analyze(clip, cfg)
        except InputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return _control_json(ctrl)

    @app.post("/synthesize")
    def synthesize_clip(payload: SynthesizePayload):
        try:
            if payload.wav_base64 is not None:
                try:
                    blob = base64.b64decode(payload.wav_base64, validate=True)
                except (ValueError, TypeError) as exc:
                    raise InputError(f"bad base64 audio: {exc}") from exc
                source = ingest(blob, cfg)
            elif payload.features is not None:
                source = ControlFrames(
                    f0=np.asarray(payload.features.f0),
                    loudness=np.asarray(payload.features.loudness),
                    onset=np.asarray(payload.features.onset),
                    harmonic=np.asarray(payload.features.harmonic),
                )
            else:
                raise InputError("request needs either features or wav_base64")
            request = SynthesisRequest(
                z_mode=payload.z_mode,
                z_value=payload.z_value,
                z_curve=None if payload.z_curve is None else np.asarray(payload.z_curve),
                seed=payload.seed,
            )
            clip = synthesize(ckpt, source, request)
        except InputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except DiffsfxError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return Response(content=wav_bytes(clip.samples, clip.sample_rate), media_type="audio/wav")

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="static")
    return app


def serve(ckpt_path, port: int, static_dir=None, host: str = "127.0.0.1") -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    ckpt = load_checkpoint(ckpt_path)
    app = create_app(ckpt, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
