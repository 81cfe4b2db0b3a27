"""Framing, windows, the real-input DFT and the real cepstrum.

The transforms are thin contracts over ``numpy.fft.rfft``/``irfft``:
power-of-two lengths only, and the half spectrum (``L/2 + 1`` bins) is the
canonical representation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from speechmark.audio_io import AudioClip
from speechmark.errors import AllZeroFrame, NonPowerOfTwoLength

DEFAULT_FLOOR_DB = -120.0


class Window(str, enum.Enum):
    RECTANGULAR = "rectangular"
    HAMMING = "hamming"


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class FrameSpec:
    """Short-time analysis geometry (defaults: 32 ms / 16 ms at 8 kHz)."""

    frame_len: int = 256
    hop: int = 128
    window: Window = Window.RECTANGULAR

    def __post_init__(self):
        if not is_power_of_two(self.frame_len):
            raise NonPowerOfTwoLength(f"frame_len {self.frame_len} is not a power of two")
        if not 0 < self.hop <= self.frame_len:
            raise ValueError(f"hop must satisfy 0 < hop <= frame_len, got {self.hop}")
        object.__setattr__(self, "window", Window(self.window))

    def count(self, n_samples: int) -> int:
        if n_samples < self.frame_len:
            return 0
        return (n_samples - self.frame_len) // self.hop + 1


@dataclass(frozen=True)
class FrameSequence:
    frames: np.ndarray  # (n_frames, frame_len), read-only
    starts: np.ndarray
    spec: FrameSpec

    def __len__(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True)
class Spectrum:
    bins: np.ndarray
    frame_len: int
    sample_rate: int | None = None

    def __post_init__(self):
        if self.bins.shape[0] != self.frame_len // 2 + 1:
            raise ValueError(
                f"{self.bins.shape[0]} bins do not match frame_len {self.frame_len}"
            )

    def frequencies(self) -> np.ndarray:
        if self.sample_rate is None:
            raise ValueError("spectrum has no sample rate")
        return np.arange(self.bins.shape[0]) * self.sample_rate / self.frame_len


def frame_signal(clip: AudioClip, spec: FrameSpec) -> FrameSequence:
    """Cut ``clip`` into full frames; a trailing partial frame is dropped, not padded."""
    n = spec.count(len(clip))
    starts = np.arange(n, dtype=np.int64) * spec.hop
    if n:
        idx = starts[:, None] + np.arange(spec.frame_len)[None, :]
        frames = clip.samples[idx]
    else:
        frames = np.empty((0, spec.frame_len))
    frames.setflags(write=False)
    starts.setflags(write=False)
    return FrameSequence(frames, starts, spec)


def window_coefficients(length: int, window: Window) -> np.ndarray:
    window = Window(window)
    if window is Window.RECTANGULAR:
        return np.ones(length)
    if length == 1:
        return np.ones(1)
    n = np.arange(length)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))


def apply_window(frame, window: Window) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.size == 0:
        raise ValueError("cannot window an empty frame")
    if Window(window) is Window.RECTANGULAR:
        return frame.copy()
    return frame * window_coefficients(frame.shape[-1], window)


def dft(frame, sample_rate: int | None = None) -> Spectrum:
    x = np.asarray(frame, dtype=np.float64)
    if not is_power_of_two(x.shape[0]):
        raise NonPowerOfTwoLength(f"frame length {x.shape[0]} is not a power of two")
    return Spectrum(np.fft.rfft(x), x.shape[0], sample_rate)


def idft(spec: Spectrum) -> np.ndarray:
    """Real inverse of a half spectrum (conjugate-symmetric extension implied)."""
    return np.fft.irfft(spec.bins, n=spec.frame_len)


def real_cepstrum(frame, floor_db: float | None = DEFAULT_FLOOR_DB) -> np.ndarray:
    """Inverse DFT of the floored log power spectrum.

    The floor is relative: bins below ``10**(floor_db/10) * max(power)`` are
    raised to it. An all-zero frame has no reference level, so the floor
    becomes absolute and the result is a flat cepstrum (impulse at 0).
    With ``floor_db=None`` an all-zero frame raises :class:`AllZeroFrame`.
    """
    spectrum = dft(frame)
    power = np.abs(spectrum.bins) ** 2
    peak = float(power.max())
    if floor_db is None:
        if peak == 0.0:
            raise AllZeroFrame("log power is undefined for an all-zero frame")
        with np.errstate(divide="ignore"):
            log_power = np.log(power)
    else:
        scale = 10.0 ** (floor_db / 10.0)
        eps = scale * peak if peak > 0.0 else scale
        log_power = np.log(np.maximum(power, eps))
    return idft(Spectrum(log_power.astype(np.complex128), spectrum.frame_len))
