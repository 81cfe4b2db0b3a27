"""Fidelity measures for stego audio and recovered payloads."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from speechmark.audio_io import AudioClip
from speechmark.errors import InvalidReference, LengthMismatch

INF_MARKER = "inf"


def snr(reference: AudioClip, test: AudioClip) -> float:
    """10*log10(sum ref^2 / sum (ref - test)^2); ``math.inf`` for a zero residual."""
    if len(reference) != len(test):
        raise LengthMismatch(f"lengths differ: {len(reference)} vs {len(test)}")
    if reference.sample_rate != test.sample_rate:
        raise LengthMismatch(f"sample rates differ: {reference.sample_rate} vs {test.sample_rate}")
    ref = reference.samples
    sig = float(np.sum(ref * ref))
    if sig == 0.0:
        raise InvalidReference("reference signal has zero energy")
    err = ref - test.samples
    noise = float(np.sum(err * err))
    if noise == 0.0:
        return math.inf
    return 10.0 * math.log10(sig / noise)


def ber(sent: bytes, received: bytes) -> float:
    if len(sent) != len(received):
        raise LengthMismatch(f"lengths differ: {len(sent)} vs {len(received)}")
    if not sent:
        return 0.0
    a = np.frombuffer(bytes(sent), dtype=np.uint8)
    b = np.frombuffer(bytes(received), dtype=np.uint8)
    flips = int(np.unpackbits(a ^ b).sum())
    return flips / (8 * len(a))


def format_db(value: float) -> str:
    return INF_MARKER if math.isinf(value) and value > 0 else f"{value:.2f}"


@dataclass(frozen=True)
class QualityReport:
    snr_db: float
    ber: float
    max_abs_diff: float

    @classmethod
    def compare(cls, reference: AudioClip, test: AudioClip) -> "QualityReport":
        from speechmark.audio_io import to_pcm16

        diff = float(np.max(np.abs(reference.samples - test.samples))) if len(reference) else 0.0
        return cls(
            snr_db=snr(reference, test),
            ber=ber(to_pcm16(reference.samples).tobytes(), to_pcm16(test.samples).tobytes()),
            max_abs_diff=diff,
        )

    def lines(self) -> list[str]:
        return [
            f"SNR: {format_db(self.snr_db)}",
            f"BER: {self.ber:g}",
            f"max_abs_diff: {self.max_abs_diff:g}",
        ]
