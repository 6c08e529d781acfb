"""Train/valid manifests and corpus statistics.

The split works on whole bulletins so near-identical content and speakers
never leak between train and valid. Manifests are JSON lines with exactly
the keys downstream ASR trainers expect: audio_filepath, duration, text.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError
from .segmenter import Segment


@dataclass(frozen=True)
class ManifestEntry:
    audio_filepath: str
    duration: float  # seconds, rounded to 3 decimals
    text: str

    def __post_init__(self):
        if self.duration <= 0:
            raise DatasetError(f"manifest duration must be positive: {self.audio_filepath}")
        if not self.text:
            raise DatasetError(f"manifest text must be non-empty: {self.audio_filepath}")


@dataclass(frozen=True)
class SplitConfig:
    valid_fraction: float = 0.07
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.valid_fraction < 0.5:
            raise DatasetError(f"valid_fraction must be in (0, 0.5), got {self.valid_fraction}")


def split(
    segments: list[Segment], cfg: SplitConfig | None = None
) -> tuple[list[Segment], list[Segment]]:
    """Partition kept segments into (train, valid) by whole source_id.

    Sources are shuffled with the configured seed and assigned to valid
    until its cumulative duration first reaches valid_fraction of total.
    """
    cfg = cfg or SplitConfig()
    durations: dict[str, float] = {}
    for seg in segments:
        durations[seg.source_id] = durations.get(seg.source_id, 0.0) + seg.duration
    if len(durations) < 2:
        raise DatasetError(f"cannot split {len(durations)} source(s); need at least 2")

    order = sorted(durations)
    rng = np.random.default_rng(cfg.seed)
    rng.shuffle(order)

    total = sum(durations.values())
    target = cfg.valid_fraction * total
    valid_sources: set[str] = set()
    cum = 0.0
    for source_id in order:
        if cum >= target or len(valid_sources) == len(order) - 1:
            break  # never drain train entirely
        valid_sources.add(source_id)
        cum += durations[source_id]

    train = [s for s in segments if s.source_id not in valid_sources]
    valid = [s for s in segments if s.source_id in valid_sources]
    return train, valid


def entry_for(segment: Segment, audio_path: str | Path) -> ManifestEntry:
    return ManifestEntry(
        audio_filepath=str(audio_path),
        duration=round(segment.duration, 3),
        text=segment.text,
    )


def write_manifest(entries: list[ManifestEntry], path: str | Path) -> None:
    """One JSON object per line, keys exactly audio_filepath/duration/text."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in entries:
            fh.write(
                json.dumps(
                    {"audio_filepath": e.audio_filepath, "duration": e.duration, "text": e.text},
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    entries: list[ManifestEntry] = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: line {lineno}: {exc}") from exc
        if set(obj) != {"audio_filepath", "duration", "text"}:
            raise DatasetError(f"{path}: line {lineno}: unexpected keys {sorted(obj)}")
        entries.append(ManifestEntry(obj["audio_filepath"], obj["duration"], obj["text"]))
    return entries


def duration_stats(segments: list[Segment], max_dur_s: float = 15.0) -> dict:
    """Totals, per-source hours and a 1 s histogram with right-open bins.

    Durations at or beyond max_dur_s extend the bin range so the histogram
    always conserves the segment count.
    """
    durations = [seg.duration for seg in segments]
    n_bins = max(math.ceil(max_dur_s), 1)
    if durations:
        n_bins = max(n_bins, int(max(durations)) + 1)
    counts = [0] * n_bins
    for d in durations:
        counts[min(int(d), n_bins - 1)] += 1

    per_source: dict[str, float] = {}
    for seg in segments:
        per_source[seg.source_id] = per_source.get(seg.source_id, 0.0) + seg.duration

    return {
        "total_hours": sum(durations) / 3600.0,
        "per_source_hours": {k: v / 3600.0 for k, v in sorted(per_source.items())},
        "histogram": [(float(k), float(k + 1), counts[k]) for k in range(n_bins)],
    }


def write_stats_csv(stats: dict, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["bin_start_s", "bin_end_s", "count"])
        for start, end, count in stats["histogram"]:
            writer.writerow([f"{start:.1f}", f"{end:.1f}", count])


def write_stats_svg(stats: dict, path: str | Path) -> None:
    """Minimal standalone SVG bar chart of the duration histogram."""
    hist = stats["histogram"]
    width, height, margin = 640, 320, 40
    peak = max((c for _, _, c in hist), default=0) or 1
    bar_w = (width - 2 * margin) / max(len(hist), 1)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2:.0f}" y="16" text-anchor="middle" font-size="13">'
        "Segment duration distribution</text>",
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
    ]
    for k, (start, _end, count) in enumerate(hist):
        bar_h = (height - 2 * margin) * count / peak
        x = margin + k * bar_w
        y = height - margin - bar_h
        parts.append(
            f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w * 0.9:.1f}" '
            f'height="{bar_h:.1f}" fill="#4477aa"/>'
        )
        parts.append(
            f'<text x="{x + bar_w * 0.45:.1f}" y="{height - margin + 14}" '
            f'text-anchor="middle" font-size="9">{start:.0f}</text>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def write_gender_csv(male_hours: float, female_hours: float, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "hours"])
        writer.writerow(["male", f"{male_hours:.2f}"])
        writer.writerow(["female", f"{female_hours:.2f}"])
