"""MFCC extraction: the feature representation both alignment inputs share.

Frames are 25 ms with a 10 ms hop by default. Each frame goes through
pre-emphasis, a Hamming window, an FFT power spectrum, a triangular mel
filterbank, a log, and an orthonormal DCT-II. Coefficient 0 is replaced by
the log frame energy so level offsets between real speech and formant
synthesis stay visible to the warping cost.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import AudioBuffer
from .errors import FeatureError

_BATCH_FRAMES = 8192  # bounds FFT workspace for hour-long bulletins


@dataclass(frozen=True)
class FeatureConfig:
    window_s: float = 0.025
    hop_s: float = 0.010
    fft_size: int = 512
    n_mels: int = 26
    n_coeffs: int = 13
    preemphasis: float = 0.97
    mel_fmin: float = 0.0
    mel_fmax: float | None = None  # None = sample_rate / 2
    log_floor: float = 1e-10
    cmn: bool = False  # cepstral mean normalization, off by default

    def __post_init__(self):
        if not 0 <= self.preemphasis < 1:
            raise FeatureError(f"preemphasis must be in [0, 1), got {self.preemphasis}")
        if not 0 < self.n_coeffs <= self.n_mels:
            raise FeatureError(
                f"need 0 < n_coeffs <= n_mels, got {self.n_coeffs} > {self.n_mels}"
            )
        if self.window_s <= 0 or self.hop_s <= 0:
            raise FeatureError("window_s and hop_s must be positive")

    def window_samples(self, sample_rate: int) -> int:
        return int(round(self.window_s * sample_rate))

    def hop_samples(self, sample_rate: int) -> int:
        return int(round(self.hop_s * sample_rate))


@dataclass(frozen=True)
class FeatureMatrix:
    data: np.ndarray  # frames x coefficients, float64
    hop_s: float

    def __post_init__(self):
        object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.float64))
        if self.data.ndim != 2:
            raise FeatureError("feature data must be 2-D (frames x coefficients)")
        if not np.all(np.isfinite(self.data)):
            raise FeatureError("feature data contains non-finite values")

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_coeffs(self) -> int:
        return self.data.shape[1]


def hz_to_mel(f):
    """2595 * log10(1 + f/700); accepts scalars or arrays, f >= 0."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise FeatureError("frequency must be non-negative")
    out = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(out) if out.ndim == 0 else out


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 0):
        raise FeatureError("mel value must be non-negative")
    out = 700.0 * (10.0 ** (m / 2595.0) - 1.0)
    return float(out) if out.ndim == 0 else out


def n_frames_for(n_samples: int, window: int, hop: int) -> int:
    """1 + floor((len - window) / hop) for len >= window, else 0."""
    if n_samples < window:
        return 0
    return 1 + (n_samples - window) // hop


def dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Orthonormal DCT-II basis, rows = coefficients."""
    k = np.arange(n_out)[:, None]
    n = np.arange(n_in)[None, :]
    basis = np.cos(np.pi * k * (2 * n + 1) / (2 * n_in))
    basis *= np.sqrt(2.0 / n_in)
    basis[0] *= np.sqrt(0.5)
    return basis


def mel_filterbank(sample_rate: int, cfg: FeatureConfig) -> np.ndarray:
    """Triangular filters (n_mels x fft_size//2+1), equally spaced in mel."""
    fmax = cfg.mel_fmax if cfg.mel_fmax is not None else sample_rate / 2.0
    if fmax > sample_rate / 2.0:
        raise FeatureError(f"mel_fmax {fmax} above Nyquist {sample_rate / 2}")
    n_bins = cfg.fft_size // 2 + 1
    mel_points = np.linspace(hz_to_mel(cfg.mel_fmin), hz_to_mel(fmax), cfg.n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(n_bins) * sample_rate / cfg.fft_size

    bank = np.zeros((cfg.n_mels, n_bins))
    for m in range(cfg.n_mels):
        left, center, right = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        up = (bin_freqs - left) / (center - left)
        down = (right - bin_freqs) / (right - center)
        bank[m] = np.maximum(0.0, np.minimum(up, down))
    return bank


def mfcc(buf: AudioBuffer, cfg: FeatureConfig | None = None) -> FeatureMatrix:
    """MFCC matrix for a mono buffer; requires at least one full window."""
    cfg = cfg or FeatureConfig()
    sr = buf.sample_rate
    window = cfg.window_samples(sr)
    hop = cfg.hop_samples(sr)
    if cfg.fft_size < window:
        raise FeatureError(f"fft_size {cfg.fft_size} smaller than window {window}")
    x = buf.samples
    if not np.all(np.isfinite(x)):
        raise FeatureError("input audio contains non-finite samples")
    n_frames = n_frames_for(len(x), window, hop)
    if n_frames == 0:
        raise FeatureError(
            f"input too short: {len(x)} samples < window of {window}"
        )

    # Whole-signal pre-emphasis; frame boundaries then see true neighbours.
    emphasized = np.empty_like(x)
    emphasized[0] = x[0]
    emphasized[1:] = x[1:] - cfg.preemphasis * x[:-1]

    hamming = 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(window) / (window - 1))
    bank = mel_filterbank(sr, cfg)
    dct = dct_matrix(cfg.n_coeffs, cfg.n_mels)

    out = np.empty((n_frames, cfg.n_coeffs))
    for start in range(0, n_frames, _BATCH_FRAMES):
        stop = min(start + _BATCH_FRAMES, n_frames)
        idx = np.arange(start, stop)[:, None] * hop + np.arange(window)[None, :]
        frames = emphasized[idx]
        windowed = frames * hamming
        energies = np.maximum((windowed ** 2).sum(axis=1), cfg.log_floor)
        spectrum = np.fft.rfft(windowed, n=cfg.fft_size, axis=1)
        power = (spectrum.real ** 2 + spectrum.imag ** 2) / cfg.fft_size
        mel_energy = np.maximum(power @ bank.T, cfg.log_floor)
        coeffs = np.log(mel_energy) @ dct.T
        coeffs[:, 0] = np.log(energies)
        out[start:stop] = coeffs

    if cfg.cmn:
        out -= out.mean(axis=0, keepdims=True)
    return FeatureMatrix(data=out, hop_s=cfg.hop_s)


def write_features(path: str | Path, feats: FeatureMatrix) -> None:
    """Binary dump: little-endian (uint32 n_frames, uint32 n_coeffs, float64 hop_s)
    header followed by row-major float32 data."""
    header = struct.pack("<IId", feats.n_frames, feats.n_coeffs, feats.hop_s)
    Path(path).write_bytes(header + feats.data.astype("<f4").tobytes())


def read_features(path: str | Path) -> FeatureMatrix:
    blob = Path(path).read_bytes()
    if len(blob) < 16:
        raise FeatureError(f"{path}: truncated feature file")
    n_frames, n_coeffs, hop_s = struct.unpack_from("<IId", blob, 0)
    expected = 16 + 4 * n_frames * n_coeffs
    if len(blob) != expected:
        raise FeatureError(
            f"{path}: expected {expected} bytes for {n_frames}x{n_coeffs}, got {len(blob)}"
        )
    data = np.frombuffer(blob, dtype="<f4", offset=16).reshape(n_frames, n_coeffs)
    return FeatureMatrix(data=data.astype(np.float64), hop_s=hop_s)
