"""Banded dynamic time warping between real and synthetic feature matrices.

The corridor follows the global slope of the alignment (|i*M/N - j| <=
radius) rather than the raw diagonal, because synthetic speech runs at a
systematically different rate than the broadcast audio. Accumulated costs
are kept in two rolling rows and backtrace directions in an N x band-width
byte array, so memory stays O(N * band width) regardless of M.

The inner recurrence is compiled with numba without fastmath, so its
float64 arithmetic is bit-identical to a plain-Python evaluation of the
same recurrence; equivalence tests rely on that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .audio import AudioBuffer
from .errors import AlignmentError, BandError
from .features import FeatureConfig, FeatureMatrix, mfcc
from .segmenter import Segment
from .synth import AnchoredSynthesis, SynthBackend, synthesize_sequence
from .textnorm import TextFragment

_METRICS = {"euclidean": 0, "cosine": 1}

_DIAG, _UP, _LEFT = 1, 2, 3  # predecessor codes; 0 = none


@dataclass(frozen=True)
class BandConfig:
    """Sakoe-Chiba style corridor half-width, given in seconds of audio."""

    radius_s: float = 60.0

    def __post_init__(self):
        if self.radius_s <= 0:
            raise BandError(f"band radius must be positive, got {self.radius_s}")

    def radius_frames(self, hop_s: float) -> int:
        return max(1, math.ceil(self.radius_s / hop_s))


@dataclass(frozen=True)
class WarpPath:
    """Monotone (real frame, synth frame) correspondence with its cost."""

    steps: np.ndarray  # (L, 2) int64
    total_cost: float

    def __post_init__(self):
        steps = np.ascontiguousarray(self.steps, dtype=np.int64)
        object.__setattr__(self, "steps", steps)
        if steps.ndim != 2 or steps.shape[1] != 2 or len(steps) == 0:
            raise AlignmentError("warp path must be a non-empty (L, 2) array")
        if steps[0, 0] != 0 or steps[0, 1] != 0:
            raise AlignmentError("warp path must start at (0, 0)")
        if len(steps) > 1:
            inc = np.diff(steps, axis=0)
            ok = ((inc >= 0) & (inc <= 1)).all() and (inc.sum(axis=1) >= 1).all()
            if not ok:
                raise AlignmentError("warp path steps must increment by (1,0), (0,1) or (1,1)")


def frame_distance(a: np.ndarray, b: np.ndarray, metric: str = "euclidean") -> float:
    """Distance between two feature frames; Euclidean or cosine (1 - cos)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise AlignmentError(f"frame dimension mismatch: {a.shape} vs {b.shape}")
    if metric == "euclidean":
        diff = a - b
        return float(np.sqrt(np.dot(diff, diff)))
    if metric == "cosine":
        denom = float(np.sqrt(np.dot(a, a)) * np.sqrt(np.dot(b, b)))
        if denom == 0.0:
            return 1.0
        return 1.0 - float(np.dot(a, b)) / denom
    raise AlignmentError(f"unknown metric {metric!r}")


def build_band(n: int, m: int, radius_frames: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-row inclusive column bounds of the slope-normalized corridor.

    The radius is widened to ceil(|1 - M/N|) when the sequences' lengths
    are too dissimilar for the requested radius to reach the final corner.
    """
    slope = m / n
    r = max(radius_frames, math.ceil(abs(1.0 - slope)), 1)
    center = np.arange(n) * slope
    lo = np.maximum(0, np.ceil(center - r)).astype(np.int64)
    hi = np.minimum(m - 1, np.floor(center + r)).astype(np.int64)
    return lo, hi


def check_band(lo: np.ndarray, hi: np.ndarray, n: int, m: int) -> None:
    """Raise BandError unless a monotone path can cross the corridor."""
    bad = (
        lo[0] > 0
        or hi[-1] < m - 1
        or np.any(lo > hi)
        or (n > 1 and np.any(lo[1:] > hi[:-1] + 1))
    )
    if bad:
        raise BandError(
            "warp band cannot contain a feasible path for these lengths; "
            "increase the band radius_s"
        )


@njit(cache=True)
def _dtw_kernel(real, synth, lo, hi, width, metric_id):  # pragma: no cover - compiled
    n = real.shape[0]
    m = synth.shape[0]
    k = real.shape[1]
    inf = np.inf
    prev = np.full(width, inf)
    curr = np.full(width, inf)
    dirs = np.zeros((n, width), dtype=np.uint8)
    for i in range(n):
        left_col = lo[i]
        for idx in range(width):
            curr[idx] = inf
        for j in range(left_col, hi[i] + 1):
            if metric_id == 0:
                acc = 0.0
                for c in range(k):
                    diff = real[i, c] - synth[j, c]
                    acc += diff * diff
                d = np.sqrt(acc)
            else:
                dot = 0.0
                na = 0.0
                nb = 0.0
                for c in range(k):
                    dot += real[i, c] * synth[j, c]
                    na += real[i, c] * real[i, c]
                    nb += synth[j, c] * synth[j, c]
                denom = np.sqrt(na) * np.sqrt(nb)
                d = 1.0 if denom == 0.0 else 1.0 - dot / denom
            col = j - left_col
            if i == 0 and j == 0:
                curr[col] = d
                continue
            best = inf
            direction = 0
            if i > 0:
                pl = lo[i - 1]
                ph = hi[i - 1]
                if j > 0 and pl <= j - 1 <= ph:
                    v = prev[j - 1 - pl]
                    if v < best:
                        best = v
                        direction = 1
                if pl <= j <= ph:
                    v = prev[j - pl]
                    if v < best:
                        best = v
                        direction = 2
            if j > left_col:
                v = curr[col - 1]
                if v < best:
                    best = v
                    direction = 3
            if direction != 0:
                curr[col] = d + best
                dirs[i, col] = direction
        tmp = prev
        prev = curr
        curr = tmp
    return prev, dirs


def _backtrace(dirs: np.ndarray, lo: np.ndarray, n: int, m: int) -> np.ndarray:
    i, j = n - 1, m - 1
    rev = [(i, j)]
    while i != 0 or j != 0:
        d = dirs[i, j - lo[i]]
        if d == _DIAG:
            i, j = i - 1, j - 1
        elif d == _UP:
            i -= 1
        elif d == _LEFT:
            j -= 1
        else:
            raise AlignmentError("backtrace hit an unreachable cell")
        rev.append((i, j))
    return np.array(rev[::-1], dtype=np.int64)


def dtw(
    real: FeatureMatrix,
    synth: FeatureMatrix,
    band: BandConfig | None = None,
    metric: str = "euclidean",
) -> WarpPath:
    """Minimum-cost monotone alignment of real frames to synthetic frames.

    `band=None` runs unbanded. Ties prefer the diagonal step, then (1,0),
    then (0,1), which makes the result fully deterministic.
    """
    if metric not in _METRICS:
        raise AlignmentError(f"unknown metric {metric!r}")
    n, m = real.n_frames, synth.n_frames
    if n < 1 or m < 1:
        raise AlignmentError("both feature matrices need at least one frame")
    if real.n_coeffs != synth.n_coeffs:
        raise AlignmentError(
            f"coefficient counts differ: {real.n_coeffs} vs {synth.n_coeffs}"
        )
    if real.hop_s != synth.hop_s:
        raise AlignmentError(f"hop mismatch: {real.hop_s} vs {synth.hop_s}")
    radius = band.radius_frames(real.hop_s) if band is not None else max(n, m)
    lo, hi = build_band(n, m, radius)
    check_band(lo, hi, n, m)
    width = int(np.max(hi - lo)) + 1
    last_row, dirs = _dtw_kernel(real.data, synth.data, lo, hi, width, _METRICS[metric])
    total = float(last_row[m - 1 - lo[n - 1]])
    if not math.isfinite(total):
        raise BandError("no path survived inside the band; increase the band radius_s")
    return WarpPath(steps=_backtrace(dirs, lo, n, m), total_cost=total)


def map_anchors(
    path: WarpPath,
    synthesis: AnchoredSynthesis,
    hop_s: float,
    real_duration_s: float | None = None,
) -> list[tuple[int, float, float]]:
    """Carry synthetic fragment boundaries through the warp path.

    Each synthetic boundary frame b maps to the first real frame whose path
    entry reaches column >= b, biasing starts early so speech onsets are
    not clipped. Output intervals are contiguous; the last one ends at the
    real audio duration.
    """
    steps = path.steps
    n_real = int(steps[-1, 0]) + 1
    if real_duration_s is None:
        real_duration_s = n_real * hop_s

    starts: list[float] = []
    pos = 0
    for anchor in synthesis.anchors:
        b = round(anchor.start_s / hop_s)
        while pos < len(steps) and steps[pos, 1] < b:
            pos += 1
        frame = int(steps[min(pos, len(steps) - 1), 0])
        starts.append(frame * hop_s)

    out: list[tuple[int, float, float]] = []
    for k, anchor in enumerate(synthesis.anchors):
        end = starts[k + 1] if k + 1 < len(starts) else real_duration_s
        out.append((anchor.fragment_index, starts[k], end))
    return out


def align_bulletin(
    fragments: list[TextFragment],
    real_audio: AudioBuffer,
    backend: SynthBackend,
    feature_cfg: FeatureConfig | None = None,
    band: BandConfig | None = None,
    metric: str = "euclidean",
) -> list[Segment]:
    """Full per-bulletin chain: synthesize, extract features, warp, map.

    Returns one segment per fragment, contiguous and inside the real audio,
    all initially marked kept; filtering assigns final statuses.
    """
    if not fragments:
        raise AlignmentError("stage synthesis: no fragments to align")
    feature_cfg = feature_cfg or FeatureConfig()
    if band is None:
        band = BandConfig()
    source_id = fragments[0].source_id

    def _stage(name, func, *args, **kwargs):
        try:
            return func(*args, **kwargs)
        except Exception as exc:
            raise AlignmentError(f"stage {name} ({source_id}): {exc}") from exc

    synthesis = _stage("synthesis", synthesize_sequence, fragments, backend)
    real_feats = _stage("features-real", mfcc, real_audio, feature_cfg)
    synth_feats = _stage("features-synth", mfcc, synthesis.audio, feature_cfg)
    path = _stage("dtw", dtw, real_feats, synth_feats, band, metric)
    spans = _stage(
        "anchor-mapping", map_anchors, path, synthesis, feature_cfg.hop_s, real_audio.duration
    )

    by_index = {frag.index: frag for frag in fragments}
    return [
        Segment(
            fragment_index=idx,
            source_id=source_id,
            start_s=start,
            end_s=end,
            text=by_index[idx].text,
        )
        for idx, start, end in spans
    ]


def write_path(path_obj: WarpPath, path: str | Path) -> None:
    """Debug dump: one `i<TAB>j` row per step, then `# cost=<float>`."""
    lines = [f"{i}\t{j}" for i, j in path_obj.steps]
    lines.append(f"# cost={path_obj.total_cost!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
