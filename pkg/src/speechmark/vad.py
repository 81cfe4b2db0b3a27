"""Voiced / unvoiced / silence classification from short-time energy and ZCR.

Both features are length-normalised so thresholds do not depend on the
frame size: energy is the mean squared windowed sample (multiply by L to
get the classical raw sum) and ZCR is sign changes per sample.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from speechmark.audio_io import AudioClip
from speechmark.dsp import FrameSpec, Window, frame_signal, window_coefficients
from speechmark.errors import FrameTooShort, NoFrames, NoVoicedSpeech

SILENCE_FLOOR = 1e-6
# silence = more than 40 dB below the loudest frame
SILENCE_REL = 1e-4
# crossings per sample; 0.25 is a 1 kHz sine at 8 kHz
DEFAULT_ZCR_THRESHOLD = 0.25


class Label(str, enum.Enum):
    VOICED = "voiced"
    UNVOICED = "unvoiced"
    SILENCE = "silence"


@dataclass(frozen=True)
class Thresholds:
    """Any field left as None is derived from the clip."""

    silence: float | None = None
    energy: float | None = None
    zcr: float | None = None


@dataclass(frozen=True)
class VadResult:
    labels: tuple[Label, ...]
    energies: np.ndarray
    zcrs: np.ndarray
    starts: np.ndarray
    energy_threshold: float
    zcr_threshold: float
    silence_threshold: float

    def __len__(self) -> int:
        return len(self.labels)

    def counts(self) -> dict[Label, int]:
        return {lab: sum(1 for x in self.labels if x is lab) for lab in Label}

    def mask(self, label: Label) -> np.ndarray:
        return np.array([x is label for x in self.labels], dtype=bool)


def short_time_energy(frame, window: Window = Window.RECTANGULAR) -> float:
    x = np.asarray(frame, dtype=np.float64)
    if x.size == 0:
        raise ValueError("empty frame")
    xw = x * window_coefficients(x.shape[0], window)
    return float(np.mean(xw * xw))


def _sgn(x: np.ndarray) -> np.ndarray:
    # sgn(0) = +1
    return np.where(x >= 0.0, 1.0, -1.0)


def zero_crossing_rate(frame) -> float:
    x = np.asarray(frame, dtype=np.float64)
    if x.shape[0] < 2:
        raise FrameTooShort("zero-crossing rate needs at least two samples")
    s = _sgn(x)
    return float(np.sum(np.abs(np.diff(s))) / (2.0 * x.shape[0]))


def frame_features(clip: AudioClip, spec: FrameSpec):
    frames = frame_signal(clip, spec)
    if len(frames) == 0:
        return frames, np.empty(0), np.empty(0)
    w = window_coefficients(spec.frame_len, spec.window)
    xw = frames.frames * w
    energies = np.mean(xw * xw, axis=1)
    s = _sgn(frames.frames)
    zcrs = np.sum(np.abs(np.diff(s, axis=1)), axis=1) / (2.0 * spec.frame_len)
    return frames, energies, zcrs


def default_thresholds(energies: np.ndarray) -> Thresholds:
    silence = max(SILENCE_FLOOR, SILENCE_REL * float(np.max(energies)))
    active = energies >= silence
    if np.any(active):
        energy = float(np.median(energies[active]))
    else:
        energy = silence
    return Thresholds(silence=silence, energy=energy, zcr=DEFAULT_ZCR_THRESHOLD)


def classify(
    clip: AudioClip,
    spec: FrameSpec = FrameSpec(),
    overrides: Thresholds | None = None,
) -> VadResult:
    """Label every frame of ``clip``.

    Silence if E < silence threshold; otherwise Voiced when
    E / energy_threshold >= Z / zcr_threshold (ties go to Voiced), else
    Unvoiced.
    """
    frames, energies, zcrs = frame_features(clip, spec)
    if len(frames) == 0:
        raise NoFrames(f"{len(clip)} samples is shorter than one {spec.frame_len}-sample frame")

    derived = default_thresholds(energies)
    ov = overrides or Thresholds()
    silence = derived.silence if ov.silence is None else float(ov.silence)
    energy_th = derived.energy if ov.energy is None else float(ov.energy)
    zcr_th = derived.zcr if ov.zcr is None else float(ov.zcr)
    if min(silence, energy_th, zcr_th) < 0:
        raise ValueError("thresholds must be non-negative")

    # cross-multiplied ratio test avoids dividing by a zero threshold
    voiced = energies * zcr_th >= zcrs * energy_th
    labels = tuple(
        Label.SILENCE if e < silence else (Label.VOICED if v else Label.UNVOICED)
        for e, v in zip(energies, voiced)
    )
    return VadResult(
        labels=labels,
        energies=energies,
        zcrs=zcrs,
        starts=np.asarray(frames.starts),
        energy_threshold=energy_th,
        zcr_threshold=zcr_th,
        silence_threshold=silence,
    )


def voiced_runs(result: VadResult) -> list[tuple[int, int]]:
    """Half-open [first, last+1) frame index runs of consecutive Voiced frames."""
    runs = []
    start = None
    for i, lab in enumerate(result.labels):
        if lab is Label.VOICED:
            if start is None:
                start = i
        elif start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(result.labels)))
    return runs


def longest_voiced_span(result: VadResult, spec: FrameSpec = FrameSpec()) -> tuple[int, int]:
    """Sample range ``[a, b)`` of the longest run of Voiced frames.

    Each frame contributes its hop-sized region ``[start, start + hop)``, so
    overlapping frames are not double counted. Ties go to the earliest run.
    """
    runs = voiced_runs(result)
    if not runs:
        raise NoVoicedSpeech("no frame was classified as voiced")
    first, stop = max(runs, key=lambda r: (r[1] - r[0], -r[0]))
    return int(result.starts[first]), int(result.starts[stop - 1]) + spec.hop


def longest_voiced_segment(result: VadResult, clip: AudioClip, spec: FrameSpec = FrameSpec()) -> AudioClip:
    a, b = longest_voiced_span(result, spec)
    return clip.with_samples(clip.samples[a:b])
