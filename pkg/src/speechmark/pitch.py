"""Cepstral fundamental-frequency estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from speechmark.audio_io import AudioClip
from speechmark.dsp import FrameSpec, Window, apply_window, real_cepstrum
from speechmark.errors import BandEmpty, FrameTooShort
from speechmark.vad import Label, VadResult

DEFAULT_FMIN = 50.0
DEFAULT_FMAX = 400.0
PITCH_FRAME_LEN = 1024
RELIABLE_CONFIDENCE = 2.0
# few-harmonic voiced frames have inter-harmonic valleys far below -60 dB
# that otherwise swamp the periodic part of the log spectrum
PITCH_FLOOR_DB = -60.0


@dataclass(frozen=True)
class PitchEstimate:
    f0: float
    quefrency: int
    peak_value: float
    confidence: float

    @property
    def reliable(self) -> bool:
        return self.confidence >= RELIABLE_CONFIDENCE


def quefrency_band(sample_rate: float, f_min: float, f_max: float) -> tuple[int, int]:
    if not 0 < f_min < f_max < sample_rate / 2:
        raise BandEmpty(f"need 0 < f_min < f_max < fs/2, got {f_min}, {f_max} at {sample_rate}")
    lo = math.ceil(sample_rate / f_max)
    hi = math.floor(sample_rate / f_min)
    if lo > hi:
        raise BandEmpty(f"no integer quefrency in [{sample_rate / f_max}, {sample_rate / f_min}]")
    return lo, hi


def estimate_pitch(
    frame,
    sample_rate: float,
    f_min: float = DEFAULT_FMIN,
    f_max: float = DEFAULT_FMAX,
    floor_db: float = PITCH_FLOOR_DB,
) -> PitchEstimate:
    """Pick the largest cepstral value in the quefrency band [fs/f_max, fs/f_min].

    The frame is used as given (window it beforehand if wanted). Ties favour
    the shorter quefrency. ``confidence`` is the peak over the median
    absolute cepstrum in the band; below 2 the estimate is unreliable.
    """
    x = np.asarray(frame, dtype=np.float64)
    lo, hi = quefrency_band(sample_rate, f_min, f_max)
    # the real cepstrum is symmetric, quefrencies past L/2 mirror shorter ones
    if hi > x.shape[0] // 2:
        raise FrameTooShort(
            f"quefrency {hi} needs a frame of at least {2 * hi} samples, got {x.shape[0]}"
        )
    ceps = real_cepstrum(x, floor_db)
    band = ceps[lo : hi + 1]
    k = int(np.argmax(band))
    q = lo + k
    peak = float(band[k])
    ref = float(np.median(np.abs(band)))
    if ref > 0:
        confidence = max(peak, 0.0) / ref
    else:
        confidence = 0.0
    return PitchEstimate(f0=sample_rate / q, quefrency=q, peak_value=peak, confidence=confidence)


def pitch_frame(samples: np.ndarray, center: int, length: int) -> np.ndarray:
    """``length`` samples centred on ``center``, shifted inside the signal and
    zero padded only when the whole signal is shorter than ``length``."""
    n = samples.shape[0]
    if n <= length:
        out = np.zeros(length)
        out[:n] = samples
        return out
    start = min(max(center - length // 2, 0), n - length)
    return samples[start : start + length]


def pitch_track(
    clip: AudioClip,
    vad: VadResult,
    spec: FrameSpec = FrameSpec(),
    f_min: float = DEFAULT_FMIN,
    f_max: float = DEFAULT_FMAX,
    frame_len: int = PITCH_FRAME_LEN,
) -> list[PitchEstimate | None]:
    """One entry per VAD frame; None for frames not labelled Voiced.

    Each voiced VAD frame is analysed through a longer Hamming-windowed
    frame (1024 by default) sharing its centre sample.
    """
    out: list[PitchEstimate | None] = []
    half = spec.frame_len // 2
    for start, label in zip(vad.starts, vad.labels):
        if label is not Label.VOICED:
            out.append(None)
            continue
        frame = pitch_frame(clip.samples, int(start) + half, frame_len)
        frame = apply_window(frame, Window.HAMMING)
        out.append(estimate_pitch(frame, clip.sample_rate, f_min, f_max))
    return out


def summarize(track: list[PitchEstimate | None]) -> dict[str, float]:
    f0s = np.array([e.f0 for e in track if e is not None])
    if f0s.size == 0:
        return {"voiced_frames": 0}
    return {
        "voiced_frames": int(f0s.size),
        "f0_median": float(np.median(f0s)),
        "f0_min": float(f0s.min()),
        "f0_max": float(f0s.max()),
        "reliable_frames": sum(1 for e in track if e is not None and e.reliable),
    }
