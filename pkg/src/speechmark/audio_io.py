"""PCM16 WAV reading/writing and the AudioClip container.

Only the canonical ``fmt `` and ``data`` chunks are interpreted; any other
chunk is skipped. Samples are held as float64 in [-1, 1]:

* load:  int16 / 32768        (so -32768 maps to exactly -1.0)
* save:  clamp(round(s * 32767), -32768, 32767)   (+1.0 never overflows)
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from speechmark.errors import IoFailure, MalformedContainer, UnsupportedFormat

WAVE_FORMAT_PCM = 0x0001
LOAD_SCALE = 32768.0
SAVE_SCALE = 32767.0


@dataclass(frozen=True)
class AudioClip:
    """Mono sampled signal.

    ``samples`` is stored as a read-only float64 array. Internal stages may
    carry values outside [-1, 1] (e.g. before a final clamp); ``save_wav``
    clamps on the way out.
    """

    samples: np.ndarray
    sample_rate: int
    source_bit_depth: int = 16

    def __post_init__(self):
        arr = np.array(self.samples, dtype=np.float64).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if int(self.sample_rate) <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def with_samples(self, samples) -> "AudioClip":
        return AudioClip(samples, self.sample_rate, self.source_bit_depth)

    def in_range(self) -> bool:
        return bool(np.all(np.abs(self.samples) <= 1.0))


def _iter_chunks(data: bytes):
    pos = 12
    end = len(data)
    while pos + 8 <= end:
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = pos + 8
        if body + size > end:
            raise MalformedContainer(
                f"chunk {cid!r} declares {size} bytes but only {end - body} remain"
            )
        yield cid, data[body : body + size]
        # chunks are word aligned
        pos = body + size + (size & 1)


def parse_wav_bytes(data: bytes) -> AudioClip:
    if len(data) < 12:
        raise MalformedContainer("file too short for a RIFF header")
    magic, _riff_size, form = struct.unpack_from("<4sI4s", data, 0)
    if magic != b"RIFF":
        raise MalformedContainer(f"bad RIFF magic {magic!r}")
    if form != b"WAVE":
        raise MalformedContainer(f"RIFF form is {form!r}, expected b'WAVE'")

    fmt = None
    pcm = None
    for cid, body in _iter_chunks(data):
        if cid == b"fmt ":
            if len(body) < 16:
                raise MalformedContainer("fmt chunk shorter than 16 bytes")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            if fmt is None:
                raise MalformedContainer("data chunk precedes fmt chunk")
            pcm = body
            break
    if fmt is None:
        raise MalformedContainer("missing fmt chunk")
    if pcm is None:
        raise MalformedContainer("missing data chunk")

    format_tag, channels, sample_rate, _byte_rate, _align, bits = fmt
    if format_tag != WAVE_FORMAT_PCM:
        raise UnsupportedFormat(f"format tag 0x{format_tag:04x} is not PCM")
    if bits != 16:
        raise UnsupportedFormat(f"{bits}-bit samples are not supported (16 only)")
    if channels not in (1, 2):
        raise UnsupportedFormat(f"{channels} channels are not supported")
    if sample_rate == 0:
        raise MalformedContainer("sample rate is zero")

    frame_bytes = 2 * channels
    usable = len(pcm) - len(pcm) % frame_bytes
    ints = np.frombuffer(pcm[:usable], dtype="<i2").astype(np.float64)
    if channels == 2:
        ints = ints.reshape(-1, 2).mean(axis=1)
    if ints.size == 0:
        raise MalformedContainer("data chunk holds no samples")
    return AudioClip(ints / LOAD_SCALE, sample_rate, 16)


def load_wav(path) -> AudioClip:
    """Read a 16-bit PCM RIFF/WAVE file; stereo is downmixed by averaging."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return parse_wav_bytes(data)


def to_pcm16(samples: np.ndarray) -> np.ndarray:
    ints = np.round(np.asarray(samples, dtype=np.float64) * SAVE_SCALE)
    return np.clip(ints, -32768, 32767).astype("<i2")


def wav_bytes(clip: AudioClip) -> bytes:
    pcm = to_pcm16(clip.samples).tobytes()
    rate = clip.sample_rate
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF",
        36 + len(pcm),
        b"WAVE",
        b"fmt ",
        16,
        WAVE_FORMAT_PCM,
        1,
        rate,
        rate * 2,
        2,
        16,
        b"data",
        len(pcm),
    )
    return header + pcm


def save_wav(clip: AudioClip, path) -> None:
    """Write ``clip`` as mono little-endian PCM16."""
    data = wav_bytes(clip)
    try:
        tmp = f"{os.fspath(path)}.partial"
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
