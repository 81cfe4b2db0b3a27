"""Deterministic synthetic signals with exact ground truth.

Randomness comes from ``numpy.random.Generator(PCG64(seed))``: a fixed,
published generator whose stream for a given integer seed is identical
across platforms and runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from speechmark.audio_io import AudioClip
from speechmark.dsp import FrameSpec
from speechmark.errors import AliasedHarmonics
from speechmark.vad import Label

VOICED_PEAK = 0.8
UNVOICED_AMPLITUDE = 0.1
COVER_PEAK = 0.6
COVER_NOISE_DB = -40.0


@dataclass(frozen=True)
class CorpusItem:
    clip: AudioClip
    frame_truth: tuple[Label, ...]
    f0_truth: tuple[float | None, ...] | None
    seed: int


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def harmonic_train(f0, n_samples: int, sample_rate: int, n_harmonics: int = 5) -> np.ndarray:
    """Sum of cosines at k*f0 with amplitude 1/k, peak-normalised to 0.8.

    ``f0`` may be a scalar or a per-sample array (instantaneous frequency);
    the phase is the running integral of it.
    """
    f0 = np.broadcast_to(np.asarray(f0, dtype=np.float64), (n_samples,))
    if np.max(f0) * n_harmonics >= sample_rate / 2:
        raise AliasedHarmonics(
            f"harmonic {n_harmonics} of {np.max(f0)} Hz exceeds Nyquist {sample_rate / 2}"
        )
    if n_samples == 0:
        return np.zeros(0)
    phase = 2.0 * np.pi * np.concatenate(([0.0], np.cumsum(f0[:-1]))) / sample_rate
    sig = np.zeros(n_samples)
    for k in range(1, n_harmonics + 1):
        sig += np.cos(k * phase) / k
    return VOICED_PEAK * sig / np.max(np.abs(sig))


def label_frames(sample_labels: np.ndarray, spec: FrameSpec) -> tuple[Label, ...]:
    """Majority label over each frame's samples (ties resolved by Label order)."""
    order = list(Label)
    codes = np.array([order.index(lab) for lab in sample_labels])
    n = spec.count(codes.shape[0])
    out = []
    for i in range(n):
        seg = codes[i * spec.hop : i * spec.hop + spec.frame_len]
        out.append(order[int(np.argmax(np.bincount(seg, minlength=len(order))))])
    return tuple(out)


def make_voiced(
    f0: float,
    duration: float,
    sample_rate: int = 8000,
    n_harmonics: int = 5,
    seed: int = 0,
    spec: FrameSpec = FrameSpec(),
) -> CorpusItem:
    n = int(round(duration * sample_rate))
    clip = AudioClip(harmonic_train(f0, n, sample_rate, n_harmonics), sample_rate)
    frames = spec.count(n)
    return CorpusItem(clip, (Label.VOICED,) * frames, (float(f0),) * frames, seed)


def make_sweep(
    f_start: float,
    f_end: float,
    duration: float,
    sample_rate: int = 8000,
    n_harmonics: int = 5,
    seed: int = 0,
    spec: FrameSpec = FrameSpec(),
) -> CorpusItem:
    """Voiced harmonic train whose f0 glides linearly from f_start to f_end."""
    n = int(round(duration * sample_rate))
    inst = np.linspace(f_start, f_end, n)
    clip = AudioClip(harmonic_train(inst, n, sample_rate, n_harmonics), sample_rate)
    frames = spec.count(n)
    centers = np.arange(frames) * spec.hop + spec.frame_len // 2
    f0_truth = tuple(float(inst[min(c, n - 1)]) for c in centers)
    return CorpusItem(clip, (Label.VOICED,) * frames, f0_truth, seed)


def make_segmented(
    pattern,
    sample_rate: int = 8000,
    seed: int = 0,
    f0: float = 200.0,
    spec: FrameSpec = FrameSpec(),
) -> CorpusItem:
    """Concatenate (label, seconds) segments.

    Silence is digital zero, Unvoiced is uniform white noise of amplitude
    0.1, Voiced a 5-harmonic train at ``f0`` with peak 0.8.
    """
    rng = rng_for(seed)
    parts = []
    sample_labels = []
    sample_f0 = []
    for label, seconds in pattern:
        label = Label(label)
        if seconds <= 0:
            raise ValueError(f"segment duration must be positive, got {seconds}")
        n = int(round(seconds * sample_rate))
        if label is Label.SILENCE:
            seg = np.zeros(n)
        elif label is Label.UNVOICED:
            seg = rng.uniform(-UNVOICED_AMPLITUDE, UNVOICED_AMPLITUDE, n)
        else:
            seg = harmonic_train(f0, n, sample_rate)
        parts.append(seg)
        sample_labels.extend([label] * n)
        sample_f0.extend([f0 if label is Label.VOICED else np.nan] * n)
    samples = np.concatenate(parts) if parts else np.zeros(0)
    truth = label_frames(np.array(sample_labels, dtype=object), spec)
    f0_truth = tuple(f0 if lab is Label.VOICED else None for lab in truth)
    return CorpusItem(AudioClip(samples, sample_rate), truth, f0_truth, seed)


def random_pattern(rng: np.random.Generator, n_segments: int | None = None):
    """Alternating-ish random pattern used by the labelled corpus."""
    if n_segments is None:
        n_segments = int(rng.integers(3, 7))
    labels = list(Label)
    pattern = []
    prev = None
    for _ in range(n_segments):
        choices = [lab for lab in labels if lab is not prev]
        lab = choices[int(rng.integers(len(choices)))]
        pattern.append((lab, float(rng.uniform(0.4, 1.2))))
        prev = lab
    return pattern


def make_corpus(n_items: int = 100, sample_rate: int = 8000, seed: int = 0) -> list[CorpusItem]:
    """``n_items`` segmented clips with varied patterns and f0 in 100-300 Hz."""
    rng = rng_for(seed)
    items = []
    for i in range(n_items):
        pattern = random_pattern(rng)
        f0 = float(rng.uniform(100.0, 300.0))
        items.append(make_segmented(pattern, sample_rate, seed=seed * 1_000_003 + i, f0=f0))
    return items


def make_cover(duration: float = 3.2, sample_rate: int = 22050, seed: int = 0) -> AudioClip:
    """Chord-like cover: a few slowly modulated tones below Nyquist/2 plus
    white noise 40 dB under the tones, peak-normalised to 0.6."""
    if duration <= 0:
        raise ValueError("duration must be positive")
    rng = rng_for(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    top = 0.5 * (sample_rate / 2)
    root = rng.uniform(110.0, 220.0)
    ratios = np.array([1.0, 1.25, 1.5, 2.0, 3.0, 4.0])
    sig = np.zeros(n)
    for r in ratios:
        f = root * r * (1.0 + rng.uniform(-0.003, 0.003))
        if f >= top:
            continue
        env = 1.0 + 0.3 * np.sin(2 * np.pi * rng.uniform(0.2, 1.5) * t + rng.uniform(0, 2 * np.pi))
        sig += env * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi)) / r
    rms = np.sqrt(np.mean(sig**2))
    sig += rng.standard_normal(n) * rms * 10.0 ** (COVER_NOISE_DB / 20.0)
    return AudioClip(COVER_PEAK * sig / np.max(np.abs(sig)), sample_rate)
