"""Synthetic reference audio with known per-fragment time anchors.

Two backends share one contract. The external backend shells out to any
espeak-style TTS command; the built-in test backend maps each codepoint to
a fixed-length tone so tests and demos run hermetically and byte-identically.
No silence is inserted between fragments: anchor arithmetic stays exact and
the warping step absorbs pause mismatches.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import PIPELINE_RATE, AudioBuffer, concat, read_wav, resample
from .errors import AudioFormatError, SynthBackendError
from .textnorm import TextFragment

TEST_TONE_S = 0.120
TEST_RAMP_S = 0.010
TEST_BASE_HZ = 200.0
TEST_STEP_HZ = 25.0
TEST_TONE_COUNT = 64

DEFAULT_COMMAND = "espeak-ng -v {voice} -f {text_file} -w {out_wav}"


@dataclass(frozen=True)
class SynthBackend:
    kind: str = "test"  # "external" or "test"
    command_template: str = DEFAULT_COMMAND
    voice: str = "hi"
    timeout_s: float = 120.0

    def __post_init__(self):
        if self.kind not in ("external", "test"):
            raise SynthBackendError(f"unknown backend kind {self.kind!r}")
        if self.kind == "external":
            for placeholder in ("{text_file}", "{out_wav}"):
                if self.command_template.count(placeholder) != 1:
                    raise SynthBackendError(
                        f"command template must contain {placeholder} exactly once"
                    )


@dataclass(frozen=True)
class Anchor:
    fragment_index: int
    start_s: float
    end_s: float


@dataclass(frozen=True)
class AnchoredSynthesis:
    """Concatenated synthetic audio plus contiguous fragment boundaries."""

    audio: AudioBuffer
    anchors: tuple[Anchor, ...]


def _test_tone(codepoint: int, sample_rate: int) -> np.ndarray:
    n = int(round(TEST_TONE_S * sample_rate))
    freq = TEST_BASE_HZ + (codepoint % TEST_TONE_COUNT) * TEST_STEP_HZ
    t = np.arange(n) / sample_rate
    tone = 0.6 * np.sin(2 * np.pi * freq * t)
    ramp_n = int(round(TEST_RAMP_S * sample_rate))
    ramp = 0.5 * (1 - np.cos(np.pi * np.arange(ramp_n) / ramp_n))
    tone[:ramp_n] *= ramp
    tone[-ramp_n:] *= ramp[::-1]
    return tone


def _synthesize_test(text: str) -> AudioBuffer:
    parts = [_test_tone(ord(ch), PIPELINE_RATE) for ch in text]
    return AudioBuffer(samples=np.concatenate(parts), sample_rate=PIPELINE_RATE)


def _synthesize_external(text: str, backend: SynthBackend) -> AudioBuffer:
    with tempfile.TemporaryDirectory(prefix="ttsalign-synth-") as tmp:
        text_file = Path(tmp) / "fragment.txt"
        out_wav = Path(tmp) / "fragment.wav"
        text_file.write_text(text, encoding="utf-8")
        argv = [
            token.replace("{text_file}", str(text_file))
            .replace("{out_wav}", str(out_wav))
            .replace("{voice}", backend.voice)
            for token in shlex.split(backend.command_template)
        ]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=backend.timeout_s
            )
        except subprocess.TimeoutExpired as exc:
            raise SynthBackendError(
                f"TTS command timed out after {backend.timeout_s}s: {' '.join(argv)}",
                stderr=(exc.stderr or b"").decode("utf-8", "replace")
                if isinstance(exc.stderr, bytes) else (exc.stderr or ""),
            ) from exc
        except OSError as exc:
            raise SynthBackendError(f"cannot run TTS command {argv[0]!r}: {exc}") from exc
        if proc.returncode != 0:
            raise SynthBackendError(
                f"TTS command exited with {proc.returncode}", stderr=proc.stderr
            )
        try:
            audio = read_wav(out_wav)
        except (AudioFormatError, FileNotFoundError) as exc:
            raise SynthBackendError(
                f"TTS produced unusable output: {exc}", stderr=proc.stderr
            ) from exc
    return resample(audio, PIPELINE_RATE)


def synthesize_fragment(text: str, backend: SynthBackend) -> AudioBuffer:
    """Synthesize one fragment at the pipeline rate."""
    if not text:
        raise SynthBackendError("cannot synthesize empty text")
    if backend.kind == "test":
        return _synthesize_test(text)
    return _synthesize_external(text, backend)


def synthesize_sequence(
    fragments: list[TextFragment], backend: SynthBackend
) -> AnchoredSynthesis:
    """Synthesize all fragments and record cumulative boundaries.

    Boundaries come from exact sample counts, so anchors are contiguous and
    the last anchor ends exactly at the audio duration.
    """
    if not fragments:
        raise SynthBackendError("need at least one fragment")
    buffers: list[AudioBuffer] = []
    anchors: list[Anchor] = []
    cursor_samples = 0
    for frag in fragments:
        try:
            buf = synthesize_fragment(frag.text, backend)
        except SynthBackendError as exc:
            raise SynthBackendError(
                f"fragment {frag.index} of {frag.source_id}: {exc}",
                stderr=exc.stderr,
                fragment_index=frag.index,
            ) from exc
        start = cursor_samples / PIPELINE_RATE
        cursor_samples += len(buf)
        anchors.append(Anchor(frag.index, start, cursor_samples / PIPELINE_RATE))
        buffers.append(buf)
    return AnchoredSynthesis(audio=concat(buffers), anchors=tuple(anchors))
