"""End-to-end hide / reveal wiring and the layered configuration.

Configuration precedence: built-in defaults < ``key = value`` config file <
explicit overrides (command-line flags).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from speechmark import metrics, pitch, vad, watermark
from speechmark.audio_io import AudioClip
from speechmark.dsp import FrameSpec, Window
from speechmark.normalize import log_denormalize, log_normalize, wiener_denoise


@dataclass(frozen=True)
class PipelineConfig:
    frame_len: int = 256
    hop: int = 128
    window: str = Window.RECTANGULAR.value
    fmin: float = pitch.DEFAULT_FMIN
    fmax: float = pitch.DEFAULT_FMAX
    silence_threshold: float | None = None
    energy_threshold: float | None = None
    zcr_threshold: float | None = None
    block_len: int = 1024
    lo_frac: float = 0.75
    hi_frac: float = 0.9375
    delta: float = watermark.DEFAULT_DELTA
    seed: int = 0

    def __post_init__(self):
        # construct once so bad values fail at config time
        self.frame_spec()
        self.embed_params()

    def frame_spec(self) -> FrameSpec:
        return FrameSpec(self.frame_len, self.hop, Window(self.window))

    def thresholds(self) -> vad.Thresholds:
        return vad.Thresholds(self.silence_threshold, self.energy_threshold, self.zcr_threshold)

    def embed_params(self) -> watermark.EmbedParams:
        return watermark.EmbedParams(self.block_len, self.lo_frac, self.hi_frac, self.delta)

    def updated(self, **values) -> "PipelineConfig":
        known = {f.name: f for f in dataclasses.fields(self)}
        clean = {}
        for key, raw in values.items():
            if raw is None:
                continue
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            clean[key] = _coerce(key, raw)
        return dataclasses.replace(self, **clean)


_INT_KEYS = {"frame_len", "hop", "block_len", "seed"}
_STR_KEYS = {"window"}


def _coerce(key: str, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw.lower()
    if key in _INT_KEYS:
        return int(raw)
    if raw.lower() in ("", "none", "auto"):
        return None
    return float(raw)


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def load_config(path=None, **overrides) -> PipelineConfig:
    cfg = PipelineConfig()
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cfg = cfg.updated(**parse_config_text(fh.read()))
    return cfg.updated(**overrides)


@dataclass
class HideReport:
    labels: dict[str, int]
    pitch: dict[str, float]
    segment_samples: int
    peak_y: float
    ratio_n: float
    payload_bytes: int
    slots_used: int
    capacity: int
    snr_db: float
    extra: dict[str, str] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"frames_{k}: {v}" for k, v in self.labels.items()]
        for k, v in self.pitch.items():
            out.append(f"{k}: {v:.2f}" if isinstance(v, float) else f"{k}: {v}")
        out += [
            f"segment_samples: {self.segment_samples}",
            f"Y: {self.peak_y:.6f}",
            f"N: {self.ratio_n:.6f}",
            f"payload_bytes: {self.payload_bytes}",
            f"slots_used: {self.slots_used}",
            f"capacity: {self.capacity}",
            f"SNR: {metrics.format_db(self.snr_db)}",
        ]
        out += [f"{k}: {v}" for k, v in self.extra.items()]
        return out


def silence_reference(result: vad.VadResult, clip: AudioClip, spec: FrameSpec) -> AudioClip | None:
    """Hop-sized regions of the Silence frames, used as the noise reference."""
    parts = [
        clip.samples[int(s) : int(s) + spec.hop]
        for s, lab in zip(result.starts, result.labels)
        if lab is vad.Label.SILENCE
    ]
    if not parts:
        return None
    return clip.with_samples(np.concatenate(parts))


def prepare_secret(secret: AudioClip, config: PipelineConfig = PipelineConfig()):
    """VAD -> longest voiced run -> Wiener -> pitch (reported only) -> log normalisation."""
    spec = config.frame_spec()
    result = vad.classify(secret, spec, config.thresholds())
    segment = vad.longest_voiced_segment(result, secret, spec)
    denoised = wiener_denoise(segment, silence_reference(result, secret, spec), spec)
    track = pitch.pitch_track(secret, result, spec, config.fmin, config.fmax)
    normalized = log_normalize(denoised)
    return result, track, segment, normalized


def hide(
    secret: AudioClip,
    cover: AudioClip,
    config: PipelineConfig = PipelineConfig(),
) -> tuple[AudioClip, watermark.WatermarkPayload, HideReport]:
    result, track, segment, normalized = prepare_secret(secret, config)
    payload = watermark.serialize(normalized)
    params = config.embed_params()
    cap = watermark.capacity(cover, params)
    stego = watermark.embed(cover, payload, params)
    report = HideReport(
        labels={lab.value: n for lab, n in result.counts().items()},
        pitch=pitch.summarize(track),
        segment_samples=len(segment),
        peak_y=normalized.peak_y,
        ratio_n=normalized.ratio_n,
        payload_bytes=payload.count,
        slots_used=len(payload),
        capacity=cap.slots,
        snr_db=metrics.snr(cover, stego),
    )
    return stego, payload, report


def reveal(
    stego: AudioClip,
    config: PipelineConfig = PipelineConfig(),
) -> watermark.WatermarkPayload:
    return watermark.extract(stego, config.embed_params())


def payload_audio(payload: watermark.WatermarkPayload, peak_y: float | None = None) -> AudioClip:
    """Normalised samples as audio, or |x| restored when the sender's peak is known."""
    if peak_y is None:
        return AudioClip(payload.samples, payload.sample_rate)
    return log_denormalize(payload.to_normalized(peak_y))
