"""PCM WAV reading/writing, mono mixdown, resampling and time slicing.

All audio inside the pipeline is carried as an AudioBuffer: float samples
in [-1, 1] plus a sample rate. Files are parsed with a small RIFF reader
rather than the stdlib ``wave`` module because we need IEEE-float input
support and byte-offset diagnostics for truncated files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AudioFormatError

PIPELINE_RATE = 16_000

_FMT_PCM = 0x0001
_FMT_IEEE_FLOAT = 0x0003
_FMT_EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class AudioBuffer:
    """Mono audio: float64 samples in [-1, 1] and a positive sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise AudioFormatError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.samples.ndim != 1:
            raise AudioFormatError("AudioBuffer samples must be one-dimensional")
        if not np.all(np.isfinite(self.samples)):
            raise AudioFormatError("AudioBuffer samples must be finite")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def read_wav(path: str | Path) -> AudioBuffer:
    """Read a RIFF/WAVE file (PCM-16 or float-32, 1-2 channels) as mono.

    Stereo is mixed down by averaging the channels; 16-bit samples are
    scaled by 1/32768. Unsupported codecs and truncated files raise
    AudioFormatError with the byte offset of the problem.
    """
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise AudioFormatError(f"{path}: truncated RIFF header at offset {len(data)}")
    if data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise AudioFormatError(f"{path}: not a RIFF/WAVE file (offset 0)")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + size > len(data):
            if cid == b"data":
                # Tolerate a short final data chunk (common with streaming writers).
                size = len(data) - body_start
            else:
                raise AudioFormatError(
                    f"{path}: chunk {cid!r} at offset {pos} overruns file "
                    f"(declares {size} bytes, {len(data) - body_start} available)"
                )
        if cid == b"fmt ":
            if size < 16:
                raise AudioFormatError(f"{path}: fmt chunk too small at offset {pos}")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif cid == b"data":
            payload = data[body_start:body_start + size]
        pos = body_start + size + (size & 1)  # chunks are word-aligned

    if fmt is None:
        raise AudioFormatError(f"{path}: missing fmt chunk")
    if payload is None:
        raise AudioFormatError(f"{path}: missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format == _FMT_EXTENSIBLE:
        raise AudioFormatError(f"{path}: WAVE_FORMAT_EXTENSIBLE not supported")
    if channels not in (1, 2):
        raise AudioFormatError(f"{path}: unsupported channel count {channels}")

    if audio_format == _FMT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (2 * channels)], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == _FMT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % (4 * channels)], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise AudioFormatError(
            f"{path}: unsupported codec (format tag {audio_format}, {bits}-bit)"
        )

    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    return AudioBuffer(samples=samples, sample_rate=sample_rate)


def write_wav(path: str | Path, buf: AudioBuffer) -> None:
    """Write mono PCM-16. Scaling by 32768 makes read_wav∘write_wav exact."""
    scaled = np.rint(buf.samples * 32768.0)
    ints = np.clip(scaled, -32768, 32767).astype("<i2")
    payload = ints.tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, _FMT_PCM, 1, buf.sample_rate,
        buf.sample_rate * 2, 2, 16,
        b"data", len(payload),
    )
    Path(path).write_bytes(header + payload)


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Linear-interpolation resampling; identity when rates match."""
    if target_rate <= 0:
        raise AudioFormatError(f"target rate must be positive, got {target_rate}")
    if target_rate == buf.sample_rate:
        return buf
    n_out = int(round(len(buf) * target_rate / buf.sample_rate))
    if len(buf) == 0 or n_out == 0:
        return AudioBuffer(samples=np.zeros(0), sample_rate=target_rate)
    out_t = np.arange(n_out) / target_rate
    in_t = np.arange(len(buf)) / buf.sample_rate
    return AudioBuffer(samples=np.interp(out_t, in_t, buf.samples), sample_rate=target_rate)


def slice_buffer(buf: AudioBuffer, start_s: float, end_s: float) -> AudioBuffer:
    """Samples in [floor(start·sr), floor(end·sr)); bounds are validated."""
    if not (0.0 <= start_s < end_s):
        raise AudioFormatError(f"invalid slice [{start_s}, {end_s}): need 0 <= start < end")
    if end_s > buf.duration + 1e-12:
        raise AudioFormatError(
            f"slice end {end_s:.6f}s beyond buffer duration {buf.duration:.6f}s"
        )
    a = int(np.floor(start_s * buf.sample_rate))
    b = int(np.floor(min(end_s, buf.duration) * buf.sample_rate))
    return AudioBuffer(samples=buf.samples[a:b].copy(), sample_rate=buf.sample_rate)


def concat(buffers: list[AudioBuffer]) -> AudioBuffer:
    """Concatenate buffers sharing one sample rate."""
    if not buffers:
        raise AudioFormatError("cannot concatenate zero buffers")
    rates = {b.sample_rate for b in buffers}
    if len(rates) != 1:
        raise AudioFormatError(f"mixed sample rates in concat: {sorted(rates)}")
    return AudioBuffer(
        samples=np.concatenate([b.samples for b in buffers]),
        sample_rate=buffers[0].sample_rate,
    )
