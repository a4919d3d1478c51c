"""Command-line entry points.

Subcommands: preprocess (directory -> feature cache), train (cache ->
checkpoint), synth (checkpoint + guiding WAV -> WAV), eval (reference vs
generated corpus report), serve (HTTP service).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .audio_io import ingest, write_wav
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig
from .dataset import build_dataset, load_cache, preprocess
from .errors import DiffsfxError, InputError
from .metrics import evaluate_corpus
from .model import Model
from .synthesis import SynthesisRequest, synthesize
from .train import fit

log = logging.getLogger(__name__)


def parse_z(text: str, frame_count: int) -> SynthesisRequest:
    """--z accepts 'encoded', a float constant, or a curve file path.

    A curve file is plain text, one value per line (or whitespace separated),
    resampled by linear interpolation when its length differs from the frame
    count.
    """
    if text == "encoded":
        return SynthesisRequest(z_mode="encoded")
    try:
        value = float(text)
    except ValueError:
        pass
    else:
        return SynthesisRequest(z_mode="constant", z_value=value)
    path = Path(text)
    if not path.exists():
        raise InputError(f"--z '{text}' is neither 'encoded', a number, nor a file")
    try:
        curve = np.loadtxt(path, dtype=np.float64).reshape(-1)
    except ValueError as exc:
        raise InputError(f"cannot parse curve file '{path}': {exc}") from exc
    if curve.size == 0:
        raise InputError(f"curve file '{path}' is empty")
    if curve.size != frame_count:
        grid = np.linspace(0.0, 1.0, curve.size)
        target = np.linspace(0.0, 1.0, frame_count)
        curve = np.interp(target, grid, curve)
    return SynthesisRequest(z_mode="curve", z_curve=curve)


def cmd_preprocess(args) -> int:
    dataset = build_dataset(args.in_dir, seed=args.seed)
    report = preprocess(dataset, args.out)
    print(f"written={report.written} skipped={report.skipped} failed={len(report.failed)}")
    for failure in report.failed:
        print(f"failed.{failure['id']}={failure['error']}")
    return 0 if report.written + report.skipped > 0 else 1


def cmd_train(args) -> int:
    config = RunConfig.load(args.config)
    data = load_cache(args.cache, split="train")
    if not data:
        raise InputError(f"cache '{args.cache}' holds no training clips")
    model = Model(config.model, seed=config.train.seed)
    out = Path(args.out)
    log_path = args.log if args.log else str(out) + ".log.jsonl"

    def checkpoint_fn(step: int) -> str:
        save_checkpoint(out, model, config, step)
        return str(out)

    history = fit(
        model,
        data,
        config.train,
        frame_cfg=config.frames,
        log_path=log_path,
        checkpoint_fn=checkpoint_fn,
        checkpoint_every=args.checkpoint_every,
        progress_fn=lambda r: print(
            f"step={r.step} total={r.total:.4f} rec={r.reconstruction:.4f} beta={r.beta:g}"
        )
        if r.step % max(1, args.print_every) == 0
        else None,
    )
    save_checkpoint(out, model, config, history[-1].step if history else 0)
    print(f"checkpoint={out} steps={len(history)} log={log_path}")
    return 0


def cmd_synth(args) -> int:
    ckpt = load_checkpoint(args.ckpt)
    request = parse_z(args.z, ckpt.config.frames.frame_count)
    request.seed = args.seed
    clip = ingest(args.in_wav, ckpt.config.frames)
    out_clip = synthesize(ckpt, clip, request)
    write_wav(args.out, out_clip.samples, out_clip.sample_rate)
    print(f"wrote={args.out} samples={out_clip.length}")
    return 0


def cmd_eval(args) -> int:
    report = evaluate_corpus(args.ref, args.gen, emb_ref=args.emb_ref, emb_gen=args.emb_gen)
    lines = []
    for key, value in report.aggregate().items():
        lines.append(f"{key}={value}")
    for pair in report.pairs:
        lines.append(f"pair.{pair['name']}.lsd={pair['lsd']}")
        lines.append(f"pair.{pair['name']}.msstft={pair['msstft']}")
    for name in report.skipped:
        lines.append(f"skipped={name}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    serve(args.ckpt, args.port, static_dir=args.static, host=args.host)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diffsfx", description="sound-effects synthesis engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="analyze a WAV directory into a feature cache")
    p.add_argument("--in", dest="in_dir", required=True, help="directory of WAV files")
    p.add_argument("--out", required=True, help="cache directory")
    p.add_argument("--seed", type=int, default=0, help="train/test split seed")
    p.set_defaults(fn=cmd_preprocess)

    p = sub.add_parser("train", help="train a model from a feature cache")
    p.add_argument("--config", required=True, help="run config JSON")
    p.add_argument("--cache", required=True, help="cache directory from preprocess")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--log", default=None, help="JSONL loss log (default: <out>.log.jsonl)")
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--print-every", type=int, default=50)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("synth", help="synthesize from a guiding WAV")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="in_wav", required=True, help="guiding WAV file")
    p.add_argument("--z", default="encoded", help="'encoded', a constant, or a curve file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output WAV path")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("eval", help="compare a generated corpus against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--gen", required=True)
    p.add_argument("--emb-ref", default=None)
    p.add_argument("--emb-gen", default=None)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--static", default=None, help="optional static frontend directory")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DiffsfxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
