"""Acceptance heuristics for aligned segments plus audio cutting.

Filtering never deletes anything: it assigns kept/rejected statuses so the
rejection report can account for every aligned fragment. The rules, in
precedence order: the first five segments of each bulletin go (presenter
introductions get absorbed into them), segments longer than 15 s go (music
interludes, bad alignments), then a configurable minimum duration and an
empty-text guard.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, replace
from pathlib import Path

from .audio import AudioBuffer, slice_buffer, write_wav
from .errors import SegmentError

logger = logging.getLogger(__name__)

REJECT_REASONS = ("head_drop", "too_long", "too_short", "empty_text", "none")


@dataclass(frozen=True)
class Segment:
    fragment_index: int
    source_id: str
    start_s: float
    end_s: float
    text: str
    status: str = "kept"
    reject_reason: str = "none"

    def __post_init__(self):
        if self.start_s > self.end_s:
            raise SegmentError(
                f"segment {self.source_id}:{self.fragment_index} has start after end"
            )
        if self.status not in ("kept", "rejected"):
            raise SegmentError(f"unknown status {self.status!r}")
        if self.reject_reason not in REJECT_REASONS:
            raise SegmentError(f"unknown reject reason {self.reject_reason!r}")
        if self.status == "kept" and self.reject_reason != "none":
            raise SegmentError("kept segments cannot carry a reject reason")

    @property
    def duration(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class FilterConfig:
    drop_head: int = 5
    max_dur_s: float = 15.0
    min_dur_s: float = 1.0  # set to 0 to disable the extra minimum-length rule
    require_nonempty_text: bool = True

    def __post_init__(self):
        if self.drop_head < 0:
            raise SegmentError("drop_head must be >= 0")
        if not 0 <= self.min_dur_s < self.max_dur_s:
            raise SegmentError("need 0 <= min_dur_s < max_dur_s")


def apply_filters(segments: list[Segment], cfg: FilterConfig | None = None) -> list[Segment]:
    """Assign statuses; order and multiset of segments are preserved.

    Precedence: head_drop > too_long > too_short > empty_text. The head
    drop counts per source bulletin. Rejection is strict for the duration
    cap: exactly max_dur_s stays kept.
    """
    cfg = cfg or FilterConfig()
    last_index: dict[str, int] = {}
    position: dict[str, int] = {}
    out: list[Segment] = []
    for seg in segments:
        prev = last_index.get(seg.source_id)
        if prev is not None and seg.fragment_index <= prev:
            raise SegmentError(
                f"segments of {seg.source_id} not ordered by fragment_index "
                f"({seg.fragment_index} after {prev})"
            )
        last_index[seg.source_id] = seg.fragment_index
        rank = position.get(seg.source_id, 0)
        position[seg.source_id] = rank + 1

        if rank < cfg.drop_head:
            status, reason = "rejected", "head_drop"
        elif seg.duration > cfg.max_dur_s:
            status, reason = "rejected", "too_long"
        elif seg.duration < cfg.min_dur_s:
            status, reason = "rejected", "too_short"
        elif cfg.require_nonempty_text and not seg.text.strip():
            status, reason = "rejected", "empty_text"
        else:
            status, reason = "kept", "none"
        out.append(replace(seg, status=status, reject_reason=reason))

    for source_id, count in position.items():
        if count <= cfg.drop_head:
            logger.warning(
                "source %s has only %d segments; head drop rejected all of them",
                source_id, count,
            )
    return out


def cut_segments(
    audio: AudioBuffer, kept_segments: list[Segment], out_dir: str | Path
) -> list[Path]:
    """Write one `<source_id>_<index>.wav` (PCM-16 mono) per kept segment."""
    out_dir = Path(out_dir)
    if not out_dir.is_dir():
        raise SegmentError(f"output directory does not exist: {out_dir}")
    written: list[Path] = []
    for seg in kept_segments:
        if seg.end_s > audio.duration + 1e-9 or seg.start_s < 0 or seg.duration <= 0:
            raise SegmentError(
                f"segment {seg.source_id}:{seg.fragment_index} "
                f"[{seg.start_s:.3f}, {seg.end_s:.3f}] outside audio of "
                f"{audio.duration:.3f}s"
            )
        piece = slice_buffer(audio, seg.start_s, min(seg.end_s, audio.duration))
        target = out_dir / f"{seg.source_id}_{seg.fragment_index}.wav"
        try:
            write_wav(target, piece)
        except OSError as exc:
            raise SegmentError(f"cannot write {target}: {exc}") from exc
        written.append(target)
    return written


def write_rejection_report(segments: list[Segment], path: str | Path) -> None:
    """CSV of every segment's status: source_id,index,start_s,end_s,duration_s,status,reason."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["source_id", "index", "start_s", "end_s", "duration_s", "status", "reason"]
        )
        for seg in segments:
            writer.writerow(
                [
                    seg.source_id,
                    seg.fragment_index,
                    f"{seg.start_s:.3f}",
                    f"{seg.end_s:.3f}",
                    f"{seg.duration:.3f}",
                    seg.status,
                    seg.reject_reason,
                ]
            )
