"""Blind multi-level QIM embedding in the upper spectral subband.

Wire format, one byte per slot in slot order::

    magic    4 bytes  0x53504D4B  big-endian
    version  1 byte   0x01
    rate     4 bytes  uint32 BE   sample rate of the secret
    count    4 bytes  uint32 BE   number of sample bytes
    crc32    4 bytes  uint32 BE   CRC-32 (IEEE, zlib) of the sample bytes
    samples  count bytes          round(255 * normalised sample)

Slots are the DFT bins ``k`` of consecutive ``block_len`` blocks with
``lo * L/2 <= k <= hi * L/2`` (Nyquist excluded), enumerated block by
block then by ascending bin. A byte ``v`` is written by moving the bin
magnitude onto the lattice ``(v + 0.5) * delta + j * 256 * delta`` nearest
to its current value; extraction reads ``floor(m / delta) mod 256``.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass

import numpy as np

from speechmark.audio_io import AudioClip
from speechmark.dsp import is_power_of_two
from speechmark.errors import (
    BadMagic,
    ClampViolation,
    CrcMismatch,
    PayloadTooLarge,
    TruncatedStego,
)
from speechmark.normalize import NormalizedSpeech, with_peak

MAGIC = 0x53504D4B
VERSION = 1
HEADER = struct.Struct(">IBIII")
HEADER_LEN = HEADER.size  # 17
LEVELS = 256

# Measured on make_cover() with a full-capacity random payload, the largest
# bin-magnitude change caused by one PCM16 save/load is about 9e-4 (checked in
# tests/test_watermark.py::test_default_delta_clears_pcm_perturbation).
# 0.003 is > 3x that, and a fully loaded cover still stays above 30 dB SNR.
DEFAULT_DELTA = 0.003


@dataclass(frozen=True)
class EmbedParams:
    block_len: int = 1024
    subband_lo_frac: float = 0.75
    subband_hi_frac: float = 0.9375
    delta: float = DEFAULT_DELTA
    levels: int = LEVELS

    def __post_init__(self):
        if not is_power_of_two(self.block_len):
            raise ValueError(f"block_len {self.block_len} is not a power of two")
        if not 0.5 <= self.subband_lo_frac < self.subband_hi_frac <= 1.0:
            raise ValueError("need 0.5 <= subband_lo_frac < subband_hi_frac <= 1.0")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.levels != LEVELS:
            raise ValueError("only 256-level (one byte per slot) embedding is supported")

    def slot_bins(self) -> np.ndarray:
        half = self.block_len // 2
        lo = math.ceil(self.subband_lo_frac * half)
        hi = math.floor(self.subband_hi_frac * half)
        return np.array([k for k in range(lo, hi + 1) if k != half], dtype=np.int64)


@dataclass(frozen=True)
class Capacity:
    slots: int
    blocks: int
    slots_per_block: int


@dataclass(frozen=True)
class WatermarkPayload:
    sample_rate: int
    sample_bytes: bytes
    magic: int = MAGIC
    version: int = VERSION
    crc32: int | None = None

    def __post_init__(self):
        if self.crc32 is None:
            object.__setattr__(self, "crc32", zlib.crc32(self.sample_bytes))

    @property
    def count(self) -> int:
        return len(self.sample_bytes)

    @property
    def samples(self) -> np.ndarray:
        return np.frombuffer(self.sample_bytes, dtype=np.uint8) / 255.0

    def to_bytes(self) -> bytes:
        head = HEADER.pack(self.magic, self.version, self.sample_rate, self.count, self.crc32)
        return head + self.sample_bytes

    def __len__(self) -> int:
        return HEADER_LEN + self.count

    def to_normalized(self, peak_y: float) -> NormalizedSpeech:
        """Attach a caller-supplied peak; Y is not carried by the payload."""
        return with_peak(self.samples, peak_y, self.sample_rate)


def serialize(ns: NormalizedSpeech) -> WatermarkPayload:
    if len(ns) > 0xFFFFFFFF:
        raise ValueError("too many samples for a 32-bit count")
    q = np.round(np.clip(ns.samples, 0.0, 1.0) * 255.0).astype(np.uint8)
    return WatermarkPayload(sample_rate=ns.sample_rate, sample_bytes=q.tobytes())


def parse_payload(data: bytes) -> WatermarkPayload:
    """Inverse of ``WatermarkPayload.to_bytes`` with full validation."""
    if len(data) < HEADER_LEN:
        raise TruncatedStego(f"{len(data)} bytes is shorter than the {HEADER_LEN}-byte header")
    magic, version, rate, count, crc = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"magic 0x{magic:08x} != 0x{MAGIC:08x}")
    if version != VERSION:
        raise BadMagic(f"unsupported payload version {version}")
    body = bytes(data[HEADER_LEN : HEADER_LEN + count])
    if len(body) < count:
        raise TruncatedStego(f"header announces {count} bytes, only {len(body)} available")
    if zlib.crc32(body) != crc:
        raise CrcMismatch(f"crc32 0x{zlib.crc32(body):08x} != header 0x{crc:08x}")
    return WatermarkPayload(sample_rate=rate, sample_bytes=body, crc32=crc)


def capacity(cover: AudioClip, params: EmbedParams = EmbedParams()) -> Capacity:
    blocks = len(cover) // params.block_len
    per_block = int(params.slot_bins().shape[0])
    return Capacity(slots=blocks * per_block, blocks=blocks, slots_per_block=per_block)


def quantize_magnitude(m: np.ndarray, values: np.ndarray, delta: float) -> np.ndarray:
    """Nearest non-negative point of the coset ``(v + 0.5) * delta + j * 256 * delta``."""
    period = LEVELS * delta
    target = period * np.floor(m / period) + (values + 0.5) * delta
    down = target - m > period / 2
    target = np.where(down & (target - period >= 0), target - period, target)
    up = m - target > period / 2
    return np.where(up, target + period, target)


def read_magnitude(m: np.ndarray, delta: float) -> np.ndarray:
    return np.mod(np.floor(m / delta), LEVELS).astype(np.uint8)


def embed_bytes(cover: AudioClip, data: bytes, params: EmbedParams = EmbedParams(), clamp: bool = True) -> AudioClip:
    """Write raw slot bytes into ``cover``; the tail of the last used block carries zeros."""
    cap = capacity(cover, params)
    if len(data) > cap.slots:
        raise PayloadTooLarge(f"{len(data)} slots needed, cover offers {cap.slots}")
    L = params.block_len
    bins = params.slot_bins()
    per = bins.shape[0]
    n_blocks = -(-len(data) // per) if per else 0
    values = np.zeros(n_blocks * per, dtype=np.float64)
    values[: len(data)] = np.frombuffer(data, dtype=np.uint8)
    values = values.reshape(n_blocks, per)

    out = np.array(cover.samples, dtype=np.float64)
    if n_blocks:
        blocks = out[: n_blocks * L].reshape(n_blocks, L)
        spectra = np.fft.rfft(blocks, axis=1)
        sel = spectra[:, bins]
        mag = np.abs(sel)
        phase = np.where(mag > 0, np.angle(sel), 0.0)
        new_mag = quantize_magnitude(mag, values, params.delta)
        spectra[:, bins] = new_mag * np.exp(1j * phase)
        out[: n_blocks * L] = np.fft.irfft(spectra, n=L, axis=1).reshape(-1)
    if clamp:
        out = np.clip(out, -1.0, 1.0)
    return cover.with_samples(out)


def extract_bytes(stego: AudioClip, n_slots: int, params: EmbedParams = EmbedParams()) -> bytes:
    cap = capacity(stego, params)
    if n_slots > cap.slots:
        raise TruncatedStego(f"{n_slots} slots requested, signal holds {cap.slots}")
    L = params.block_len
    bins = params.slot_bins()
    per = bins.shape[0]
    n_blocks = -(-n_slots // per) if per else 0
    if n_blocks == 0:
        return b""
    blocks = np.asarray(stego.samples[: n_blocks * L]).reshape(n_blocks, L)
    mag = np.abs(np.fft.rfft(blocks, axis=1)[:, bins])
    return read_magnitude(mag, params.delta).reshape(-1)[:n_slots].tobytes()


def embed(cover: AudioClip, payload: WatermarkPayload, params: EmbedParams = EmbedParams()) -> AudioClip:
    """Embed ``payload`` and verify it survives the final [-1, 1] clamp."""
    data = payload.to_bytes()
    stego = embed_bytes(cover, data, params)
    if extract_bytes(stego, len(data), params) != data:
        raise ClampViolation("clamping to [-1, 1] corrupted embedded values")
    return stego


def extract(stego: AudioClip, params: EmbedParams = EmbedParams()) -> WatermarkPayload:
    """Blind recovery: needs only the stego signal and the shared parameters."""
    cap = capacity(stego, params)
    if cap.slots < HEADER_LEN:
        raise TruncatedStego(f"signal holds {cap.slots} slots, fewer than the header")
    head = extract_bytes(stego, HEADER_LEN, params)
    magic, version, _rate, count, _crc = HEADER.unpack(head)
    if magic != MAGIC:
        raise BadMagic(f"magic 0x{magic:08x} != 0x{MAGIC:08x}")
    if version != VERSION:
        raise BadMagic(f"unsupported payload version {version}")
    if HEADER_LEN + count > cap.slots:
        raise TruncatedStego(f"header announces {count} bytes, only {cap.slots - HEADER_LEN} slots remain")
    return parse_payload(extract_bytes(stego, HEADER_LEN + count, params))


def perturb_magnitudes(
    stego: AudioClip,
    n_slots: int,
    amount: float,
    rng: np.random.Generator,
    params: EmbedParams = EmbedParams(),
) -> AudioClip:
    """Add uniform noise in ``[-amount, amount]`` to the magnitude of the first
    ``n_slots`` slot bins (phases kept). Used for robustness checks."""
    L = params.block_len
    bins = params.slot_bins()
    per = bins.shape[0]
    n_blocks = -(-n_slots // per)
    out = np.array(stego.samples, dtype=np.float64)
    blocks = out[: n_blocks * L].reshape(n_blocks, L)
    spectra = np.fft.rfft(blocks, axis=1)
    sel = spectra[:, bins]
    mag = np.abs(sel)
    noise = rng.uniform(-amount, amount, mag.shape)
    noise.reshape(-1)[n_slots:] = 0.0
    spectra[:, bins] = np.maximum(mag + noise, 0.0) * np.exp(1j * np.angle(sel))
    out[: n_blocks * L] = np.fft.irfft(spectra, n=L, axis=1).reshape(-1)
    return stego.with_samples(out)
