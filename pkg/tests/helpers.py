"""Shared test utilities: independent oracles and fixture builders.

The oracles deliberately avoid the production code paths: the reference
DTW keeps the full cost matrix and is written in plain Python, the path
enumerator tries every monotone path, and the spectral oracle uses an
O(n^2) DFT. The legacy-text encoder inverts the packaged mapping table so
corpus fixtures can be produced in KrutiDev encoding and round-tripped.
"""

from __future__ import annotations

import math
import unicodedata

import numpy as np

from ttsalign.textnorm import (
    HALANT,
    NUKTA,
    MappingTable,
    _cluster_end,
    _cluster_start,
    _is_consonant,
    _is_sign,
)

# ---------------------------------------------------------------------------
# DTW oracles


def reference_dtw(real, synth, lo=None, hi=None):
    """Full-matrix DP with the production recurrence and tie-breaking.

    Plain-Python float arithmetic in the same operation order as the
    compiled stripe kernel, so costs and paths must match bit for bit.
    """
    real = [list(map(float, row)) for row in np.atleast_2d(real)]
    synth = [list(map(float, row)) for row in np.atleast_2d(synth)]
    n, m = len(real), len(synth)
    dim = len(real[0])
    if lo is None:
        lo = [0] * n
        hi = [m - 1] * n
    inf = math.inf
    cost = [[inf] * m for _ in range(n)]
    dirs = [[0] * m for _ in range(n)]
    for i in range(n):
        for j in range(lo[i], hi[i] + 1):
            acc = 0.0
            for c in range(dim):
                diff = real[i][c] - synth[j][c]
                acc += diff * diff
            d = math.sqrt(acc)
            if i == 0 and j == 0:
                cost[0][0] = d
                continue
            best = inf
            direction = 0
            if i > 0:
                if j > 0 and lo[i - 1] <= j - 1 <= hi[i - 1]:
                    v = cost[i - 1][j - 1]
                    if v < best:
                        best, direction = v, 1
                if lo[i - 1] <= j <= hi[i - 1]:
                    v = cost[i - 1][j]
                    if v < best:
                        best, direction = v, 2
            if j > lo[i]:
                v = cost[i][j - 1]
                if v < best:
                    best, direction = v, 3
            if direction:
                cost[i][j] = d + best
                dirs[i][j] = direction

    i, j = n - 1, m - 1
    rev = [(i, j)]
    while (i, j) != (0, 0):
        d = dirs[i][j]
        if d == 1:
            i, j = i - 1, j - 1
        elif d == 2:
            i -= 1
        elif d == 3:
            j -= 1
        else:
            raise AssertionError("reference backtrace hit an unreachable cell")
        rev.append((i, j))
    return cost[n - 1][m - 1], rev[::-1]


def enumerate_min_cost(dist_matrix) -> float:
    """Minimum path cost by recursively visiting every monotone path."""
    d = np.asarray(dist_matrix, dtype=np.float64)
    n, m = d.shape
    best = math.inf

    stack = [(0, 0, 0.0)]
    while stack:
        i, j, acc = stack.pop()
        acc = acc + d[i, j]
        if i == n - 1 and j == m - 1:
            if acc < best:
                best = acc
            continue
        if i + 1 < n and j + 1 < m:
            stack.append((i + 1, j + 1, acc))
        if i + 1 < n:
            stack.append((i + 1, j, acc))
        if j + 1 < m:
            stack.append((i, j + 1, acc))
    return best


# ---------------------------------------------------------------------------
# spectral oracle


def brute_dft_power(frame: np.ndarray, fft_size: int) -> np.ndarray:
    """O(n^2) power spectrum, the independent check for the FFT route."""
    x = np.zeros(fft_size)
    x[: len(frame)] = frame
    bins = fft_size // 2 + 1
    out = np.empty(bins)
    base = -2j * np.pi * np.arange(fft_size) / fft_size
    for k in range(bins):
        val = np.sum(x * np.exp(base * k))
        out[k] = (val.real ** 2 + val.imag ** 2) / fft_size
    return out


def oracle_mfcc(samples: np.ndarray, sample_rate: int, cfg) -> np.ndarray:
    """MFCC chain recomputed with the brute-force DFT."""
    from ttsalign.features import dct_matrix, mel_filterbank, n_frames_for

    window = cfg.window_samples(sample_rate)
    hop = cfg.hop_samples(sample_rate)
    emphasized = np.concatenate(
        [[samples[0]], samples[1:] - cfg.preemphasis * samples[:-1]]
    )
    hamming = 0.54 - 0.46 * np.cos(2 * np.pi * np.arange(window) / (window - 1))
    bank = mel_filterbank(sample_rate, cfg)
    dct = dct_matrix(cfg.n_coeffs, cfg.n_mels)
    frames = n_frames_for(len(samples), window, hop)
    out = np.empty((frames, cfg.n_coeffs))
    for t in range(frames):
        piece = emphasized[t * hop : t * hop + window] * hamming
        power = brute_dft_power(piece, cfg.fft_size)
        mel = np.maximum(power @ bank.T, cfg.log_floor)
        coeffs = np.log(mel) @ dct.T
        coeffs[0] = np.log(max(np.sum(piece ** 2), cfg.log_floor))
        out[t] = coeffs
    return out


# ---------------------------------------------------------------------------
# gender-classification fixture


def gaussian_gender_fixture(n_per_class: int, separation: float, seed: int, dim: int = 256):
    """Two unit-variance Gaussian clouds whose means differ by `separation`
    in coordinate 0, shuffled; labels are male/female strings."""
    rng = np.random.default_rng(seed)
    cloud_m = rng.normal(size=(n_per_class, dim))
    cloud_f = rng.normal(size=(n_per_class, dim))
    cloud_f[:, 0] += separation
    X = np.vstack([cloud_m, cloud_f])
    labels = ["male"] * n_per_class + ["female"] * n_per_class
    order = rng.permutation(len(X))
    return X[order], [labels[i] for i in order]


# ---------------------------------------------------------------------------
# legacy-text encoder (fixtures only)


def encode_legacy(text: str, table: MappingTable) -> str:
    """Unicode Devanagari -> legacy bytes, inverting the mapping table.

    Moves the short-i matra before its cluster and the reph behind the
    following syllable, then greedily replaces the longest known Unicode
    sequence. Raises on anything the table cannot express; callers should
    assert decode_legacy(encode_legacy(w)) == w for their fixture words.
    """
    text = unicodedata.normalize("NFC", text)
    chars = list(text)

    # reph: र् directly before a consonant moves after that cluster + signs
    i = 0
    while i < len(chars) - 2:
        if (
            chars[i] == "र"
            and chars[i + 1] == HALANT
            and _is_consonant(chars[i + 2])
            and (i == 0 or chars[i - 1] != HALANT)
        ):
            end = _cluster_end(chars, i + 2)
            while end < len(chars) and _is_sign(chars[end]):
                end += 1
            del chars[i : i + 2]
            chars.insert(end - 2, "")  # reph marker
            continue
        i += 1

    # short-i matra moves in front of its cluster
    i = 0
    while i < len(chars):
        if chars[i] == "ि":
            prev = i - 1
            if prev >= 0 and chars[prev] == NUKTA:
                prev -= 1
            if prev >= 0 and _is_consonant(chars[prev]):
                start = _cluster_start(chars, prev)
                chars.pop(i)
                chars.insert(start, "")  # i-matra marker
        i += 1

    by_replacement: dict[str, str] = {}
    for rule in table.rules:
        if rule.replacement and rule.replacement not in by_replacement:
            by_replacement[rule.replacement] = rule.legacy
    reph_legacy = by_replacement.get("र" + HALANT)
    i_legacy = by_replacement.get("ि")
    if reph_legacy is None or i_legacy is None:
        raise ValueError("table lacks reph or short-i rules")
    lengths = sorted({len(r) for r in by_replacement}, reverse=True)

    out: list[str] = []
    s = "".join(chars)
    pos = 0
    while pos < len(s):
        ch = s[pos]
        if ch == "":
            out.append(reph_legacy)
            pos += 1
            continue
        if ch == "":
            out.append(i_legacy)
            pos += 1
            continue
        if ch == " ":
            out.append(" ")
            pos += 1
            continue
        for length in lengths:
            candidate = s[pos : pos + length]
            if candidate in by_replacement:
                out.append(by_replacement[candidate])
                pos += length
                break
        else:
            raise ValueError(f"cannot encode {ch!r} (U+{ord(ch):04X})")
    return "".join(out)
