"""speechmark command line.

Exit codes:
    0  success
    1  other library / I/O error
    2  no voiced speech in the secret
    3  payload does not fit the cover
    4  silent input (normalisation undefined)
    5  no watermark found (bad magic)
    6  payload checksum mismatch
    7  stego too short for the announced payload
    8  clamp to [-1, 1] corrupted the embedding
    64 command-line usage error
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np

from speechmark import errors, metrics, pitch, synth, vad, watermark
from speechmark.audio_io import AudioClip, load_wav, save_wav
from speechmark.normalize import cmvn, log_normalize
from speechmark.pipeline import PipelineConfig, hide, load_config, payload_audio, reveal

EXIT_CODES = [
    (errors.NoVoicedSpeech, 2),
    (errors.PayloadTooLarge, 3),
    (errors.SilentInput, 4),
    (errors.BadMagic, 5),
    (errors.CrcMismatch, 6),
    (errors.TruncatedStego, 7),
    (errors.ClampViolation, 8),
]
USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    # keep exit 2 free for NoVoicedSpeech
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def exit_code_for(exc: BaseException) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="key=value config file")
    g.add_argument("--frame-len", type=int)
    g.add_argument("--hop", type=int)
    g.add_argument("--window", choices=["rectangular", "hamming"])
    g.add_argument("--fmin", type=float)
    g.add_argument("--fmax", type=float)
    g.add_argument("--silence-threshold", type=float)
    g.add_argument("--energy-threshold", type=float)
    g.add_argument("--zcr-threshold", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--block-len", type=int)
    g.add_argument("--lo-frac", type=float)
    g.add_argument("--hi-frac", type=float)
    g.add_argument("--seed", type=int)


_CONFIG_FLAGS = (
    "frame_len", "hop", "window", "fmin", "fmax", "silence_threshold",
    "energy_threshold", "zcr_threshold", "delta", "block_len", "lo_frac",
    "hi_frac", "seed",
)


def config_from(args) -> PipelineConfig:
    overrides = {k: getattr(args, k, None) for k in _CONFIG_FLAGS}
    return load_config(args.config, **overrides)


def _kv(out, key, value):
    out.write(f"{key}: {value}\n")


def cmd_hide(args, out) -> int:
    cfg = config_from(args)
    secret = load_wav(args.secret)
    cover = load_wav(args.cover)
    stego, payload, report = hide(secret, cover, cfg)
    save_wav(stego, args.output)
    if args.payload_out:
        with open(args.payload_out, "wb") as fh:
            fh.write(payload.to_bytes())
    for line in report.lines():
        out.write(line + "\n")
    return 0


def cmd_reveal(args, out) -> int:
    cfg = config_from(args)
    payload = reveal(load_wav(args.stego), cfg)
    if args.denormalize and args.peak is None:
        raise errors.SpeechmarkError("--denormalize needs --peak Y (the sender's peak is not transmitted)")
    peak = args.peak if args.denormalize else None
    if payload.count:
        save_wav(payload_audio(payload, peak), args.output)
    if args.payload_out:
        with open(args.payload_out, "wb") as fh:
            fh.write(payload.to_bytes())
    _kv(out, "sample_rate", payload.sample_rate)
    _kv(out, "count", payload.count)
    _kv(out, "crc32", f"0x{payload.crc32:08x}")
    _kv(out, "denormalized", "yes" if peak is not None else "no")
    return 0


def cmd_vad(args, out) -> int:
    cfg = config_from(args)
    clip = load_wav(args.input)
    res = vad.classify(clip, cfg.frame_spec(), cfg.thresholds())
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["index", "start", "energy", "zcr", "label"])
    for i, (s, e, z, lab) in enumerate(zip(res.starts, res.energies, res.zcrs, res.labels)):
        w.writerow([i, int(s), f"{e:.8g}", f"{z:.6f}", lab.value])
    return 0


def cmd_pitch(args, out) -> int:
    cfg = config_from(args)
    clip = load_wav(args.input)
    spec = cfg.frame_spec()
    res = vad.classify(clip, spec, cfg.thresholds())
    track = pitch.pitch_track(clip, res, spec, cfg.fmin, cfg.fmax)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["index", "f0", "quefrency", "confidence"])
    for i, est in enumerate(track):
        if est is None:
            w.writerow([i, "", "", ""])
        else:
            w.writerow([i, f"{est.f0:.4f}", est.quefrency, f"{est.confidence:.4f}"])
    return 0


def cmd_normalize(args, out) -> int:
    if args.cmvn:
        feats = np.loadtxt(args.input, delimiter=",", ndmin=2)
        normed, stats = cmvn(feats)
        np.savetxt(args.output, normed, delimiter=",", fmt="%.12g")
        _kv(out, "frames", normed.shape[0])
        _kv(out, "coefficients", normed.shape[1])
        return 0
    clip = load_wav(args.input)
    ns = log_normalize(clip)
    save_wav(ns.as_clip(), args.output)
    _kv(out, "Y", f"{ns.peak_y:.6f}")
    _kv(out, "N", f"{ns.ratio_n:.6f}")
    return 0


def _payload_bytes(path: str, cfg: PipelineConfig) -> bytes:
    if path.lower().endswith(".wav"):
        return reveal(load_wav(path), cfg).to_bytes()
    with open(path, "rb") as fh:
        return fh.read()


def cmd_evaluate(args, out) -> int:
    cfg = config_from(args)
    if args.payload:
        a = _payload_bytes(args.reference, cfg)
        b = _payload_bytes(args.test, cfg)
        _kv(out, "BER", f"{metrics.ber(a, b):g}")
        return 0
    ref = load_wav(args.reference)
    test = load_wav(args.test)
    for line in metrics.QualityReport.compare(ref, test).lines():
        out.write(line + "\n")
    return 0


def write_truth(path, item: synth.CorpusItem) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, lab in enumerate(item.frame_truth):
            f0 = item.f0_truth[i] if item.f0_truth else None
            fh.write(f"{i},{lab.value},{'' if f0 is None else f'{f0:.4f}'}\n")


def cmd_corpus(args, out) -> int:
    cfg = config_from(args)
    os.makedirs(args.outdir, exist_ok=True)
    items = synth.make_corpus(args.count, seed=cfg.seed)
    for i, item in enumerate(items):
        base = os.path.join(args.outdir, f"segmented_{i:03d}")
        save_wav(item.clip, base + ".wav")
        write_truth(base + ".txt", item)
    voiced = synth.make_voiced(200.0, 1.0, seed=cfg.seed)
    save_wav(voiced.clip, os.path.join(args.outdir, "voiced_200hz.wav"))
    write_truth(os.path.join(args.outdir, "voiced_200hz.txt"), voiced)
    secret = synth.make_segmented(
        [("silence", 0.5), ("voiced", 0.27), ("silence", 0.5)], seed=cfg.seed
    )
    save_wav(secret.clip, os.path.join(args.outdir, "secret.wav"))
    write_truth(os.path.join(args.outdir, "secret.txt"), secret)
    save_wav(synth.make_cover(seed=cfg.seed), os.path.join(args.outdir, "cover.wav"))
    _kv(out, "segmented_clips", len(items))
    _kv(out, "outdir", args.outdir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="speechmark", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hide", help="embed the voiced part of a secret into a cover")
    p.add_argument("secret")
    p.add_argument("cover")
    p.add_argument("output")
    p.add_argument("--payload-out", help="also write the raw payload bytes")
    _common(p)
    p.set_defaults(func=cmd_hide)

    p = sub.add_parser("reveal", help="blindly extract the secret from a stego file")
    p.add_argument("stego")
    p.add_argument("output")
    p.add_argument("--denormalize", action="store_true", help="undo the log normalisation")
    p.add_argument("--peak", type=float, help="sender's peak amplitude Y, needed by --denormalize")
    p.add_argument("--payload-out", help="also write the raw payload bytes")
    _common(p)
    p.set_defaults(func=cmd_reveal)

    p = sub.add_parser("vad", help="per-frame energy / ZCR / label CSV")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_vad)

    p = sub.add_parser("pitch", help="per-frame cepstral pitch CSV")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_pitch)

    p = sub.add_parser("normalize", help="log-normalise a WAV (or CMVN a CSV matrix)")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--cmvn", action="store_true", help="treat input/output as CSV feature matrices")
    _common(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("evaluate", help="SNR / BER between two files")
    p.add_argument("reference")
    p.add_argument("test")
    p.add_argument("--payload", action="store_true",
                   help="compare payload bytes (.wav stego is extracted, other files read raw)")
    _common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("corpus", help="write the synthetic labelled corpus")
    p.add_argument("outdir")
    p.add_argument("--count", type=int, default=100)
    _common(p)
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except (errors.SpeechmarkError, OSError, ValueError) as exc:
        code = exit_code_for(exc)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
