"""Denoising and amplitude normalisation of the voiced secret.

``log_normalize`` is the speaker-masking transform used by the pipeline:

    Y = max|x|,   N = 1 / log(1 + Y),   out = N * log(1 + |x|)

so every nonzero clip maps onto [0, 1] with its peak at exactly 1. The sign
of each sample is discarded; ``log_denormalize`` recovers |x| only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from speechmark.audio_io import AudioClip
from speechmark.dsp import FrameSpec, Window, window_coefficients
from speechmark.errors import DegenerateCoefficient, NoFrames, SilentInput

NOISE_FRACTION = 0.10


@dataclass(frozen=True)
class NormalizedSpeech:
    samples: np.ndarray
    ratio_n: float
    peak_y: float
    sample_rate: int

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def as_clip(self) -> AudioClip:
        return AudioClip(self.samples, self.sample_rate)


@dataclass(frozen=True)
class CmvnStats:
    mean: np.ndarray
    std: np.ndarray

    def invert(self, normalized) -> np.ndarray:
        return np.asarray(normalized) * self.std + self.mean


def _stft_frames(x: np.ndarray, frame_len: int, hop: int):
    """Zero-pad ``x`` so every sample is covered, return (frames, starts, padded_len)."""
    n = x.shape[0]
    n_frames = max(1, -(-max(n - frame_len, 0) // hop) + 1)
    padded = np.zeros((n_frames - 1) * hop + frame_len)
    padded[:n] = x
    starts = np.arange(n_frames) * hop
    idx = starts[:, None] + np.arange(frame_len)[None, :]
    return padded[idx], starts, padded.shape[0]


def noise_power(clip: AudioClip, frame_len: int, fraction: float = NOISE_FRACTION) -> np.ndarray:
    """Mean Hamming-windowed power spectrum of the quietest ``fraction`` of frames."""
    w = window_coefficients(frame_len, Window.HAMMING)
    frames, _, _ = _stft_frames(clip.samples, frame_len, frame_len // 2)
    energies = np.sum(frames**2, axis=1)
    k = max(1, int(np.ceil(fraction * frames.shape[0])))
    quiet = np.argsort(energies, kind="stable")[:k]
    return np.mean(np.abs(np.fft.rfft(frames[quiet] * w, axis=1)) ** 2, axis=0)


def wiener_denoise(
    clip: AudioClip,
    noise_clip: AudioClip | None = None,
    spec: FrameSpec = FrameSpec(),
) -> AudioClip:
    """Frequency-domain Wiener gain ``max(0, 1 - P_noise/P)``.

    Hamming analysis frames at 50 % overlap; the modified frames are
    overlap-added and divided by the summed analysis window, so a unit gain
    reproduces the input exactly. The noise spectrum comes from
    ``noise_clip`` when given, else from the quietest 10 % of ``clip``'s own
    frames.
    """
    frame_len = spec.frame_len
    hop = frame_len // 2
    if len(clip) == 0:
        raise NoFrames("empty clip")
    if noise_clip is not None:
        p_noise = np.mean(
            np.abs(np.fft.rfft(
                _stft_frames(noise_clip.samples, frame_len, hop)[0]
                * window_coefficients(frame_len, Window.HAMMING),
                axis=1,
            )) ** 2,
            axis=0,
        )
    else:
        p_noise = noise_power(clip, frame_len)

    w = window_coefficients(frame_len, Window.HAMMING)
    frames, starts, padded_len = _stft_frames(clip.samples, frame_len, hop)
    spectra = np.fft.rfft(frames * w, axis=1)
    power = np.abs(spectra) ** 2
    ratio = np.divide(p_noise, power, out=np.zeros_like(power), where=power > 0)
    gain = np.maximum(0.0, 1.0 - ratio)
    out_frames = np.fft.irfft(spectra * gain, n=frame_len, axis=1)

    acc = np.zeros(padded_len)
    wsum = np.zeros(padded_len)
    for s, f in zip(starts, out_frames):
        acc[s : s + frame_len] += f
        wsum[s : s + frame_len] += w
    y = acc / wsum
    return clip.with_samples(y[: len(clip)])


def log_normalize(clip: AudioClip) -> NormalizedSpeech:
    x = np.abs(clip.samples)
    peak = float(x.max()) if x.size else 0.0
    if peak == 0.0:
        raise SilentInput("peak amplitude is zero; N = 1/log(1) is undefined")
    ratio = 1.0 / np.log1p(peak)
    out = ratio * np.log1p(x)
    # the peak sample maps to 1 up to rounding; pin it exactly
    out[x == peak] = 1.0
    return NormalizedSpeech(out, float(ratio), peak, clip.sample_rate)


def log_denormalize(ns: NormalizedSpeech) -> AudioClip:
    """|x| = exp(s / N) - 1, clamped to [0, Y]."""
    mag = np.expm1(ns.samples / ns.ratio_n)
    return AudioClip(np.clip(mag, 0.0, ns.peak_y), ns.sample_rate)


def with_peak(samples, peak_y: float, sample_rate: int) -> NormalizedSpeech:
    """Rebuild NormalizedSpeech from bare normalised samples and a known peak."""
    if peak_y <= 0:
        raise ValueError("peak must be positive")
    return NormalizedSpeech(samples, float(1.0 / np.log1p(peak_y)), float(peak_y), sample_rate)


def cmvn(features) -> tuple[np.ndarray, CmvnStats]:
    """Per-column standardisation with population (1/N) variance."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("cmvn needs a (frames x coefficients) matrix with at least 2 frames")
    constant = np.all(x == x[0], axis=0)
    if np.any(constant):
        cols = np.flatnonzero(constant).tolist()
        raise DegenerateCoefficient(f"zero variance in coefficient(s) {cols}")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    return (x - mean) / std, CmvnStats(mean, std)
