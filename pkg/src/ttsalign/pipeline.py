"""Per-bulletin processing and the on-disk layout shared by CLI commands.

Each bulletin produces its own files under the output directory, written
via temp-file-plus-rename so a failing bulletin never corrupts a finished
one. Segment tables are CSV with full-precision times; only the rejection
report rounds for display.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .audio import read_wav, resample
from .config import PipelineConfig
from .dtw import align_bulletin
from .errors import ConfigError, PipelineError
from .segmenter import Segment
from .textnorm import (
    MappingTable,
    TextFragment,
    decode_legacy_ex,
    default_mapping,
    filter_script,
    fragmentize,
    load_mapping,
)

FRAGMENTS_DIR = "fragments"
SEGMENTS_DIR = "segments"
CUTS_DIR = "cuts"


def log_json(event: str, **fields) -> None:
    """Line-oriented JSON log to stderr."""
    record = {"event": event}
    record.update(fields)
    print(json.dumps(record, ensure_ascii=False, sort_keys=True), file=sys.stderr)


def atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def mapping_for(cfg: PipelineConfig) -> MappingTable:
    if cfg.paths.mapping_table:
        return load_mapping(cfg.paths.mapping_table)
    return default_mapping()


def discover_bulletins(cfg: PipelineConfig) -> list[tuple[str, Path, Path]]:
    """Pair `<stem>.wav` with `<stem>.txt`; any unpaired file is a config error."""
    audio_dir = Path(cfg.paths.audio_dir)
    text_dir = Path(cfg.paths.transcript_dir)
    wavs = {p.stem: p for p in sorted(audio_dir.glob("*.wav"))}
    txts = {p.stem: p for p in sorted(text_dir.glob("*.txt"))}
    missing_txt = sorted(set(wavs) - set(txts))
    missing_wav = sorted(set(txts) - set(wavs))
    if missing_txt or missing_wav:
        raise ConfigError(
            f"unpaired bulletins: audio without transcript {missing_txt}, "
            f"transcript without audio {missing_wav}"
        )
    if not wavs:
        raise ConfigError(f"no .wav/.txt pairs found under {audio_dir} and {text_dir}")
    return [(stem, wavs[stem], txts[stem]) for stem in sorted(wavs)]


def decode_transcript(
    raw_text: str, source_id: str, table: MappingTable
) -> tuple[list[TextFragment], int]:
    decoded, unmatched = decode_legacy_ex(raw_text, table)
    fragments = fragmentize(filter_script(decoded), source_id)
    return fragments, unmatched


# ---------------------------------------------------------------------------
# segment tables

_SEGMENT_FIELDS = ["source_id", "index", "start_s", "end_s", "status", "reason", "text"]


def write_segments_csv(segments: list[Segment], path: Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_SEGMENT_FIELDS)
    for seg in segments:
        writer.writerow(
            [
                seg.source_id,
                seg.fragment_index,
                repr(float(seg.start_s)),
                repr(float(seg.end_s)),
                seg.status,
                seg.reject_reason,
                seg.text,
            ]
        )
    atomic_write_text(path, buf.getvalue())


def read_segments_csv(path: Path) -> list[Segment]:
    segments: list[Segment] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _SEGMENT_FIELDS:
            raise PipelineError(f"{path}: unexpected columns {reader.fieldnames}")
        for row in reader:
            segments.append(
                Segment(
                    fragment_index=int(row["index"]),
                    source_id=row["source_id"],
                    start_s=float(row["start_s"]),
                    end_s=float(row["end_s"]),
                    text=row["text"],
                    status=row["status"],
                    reject_reason=row["reason"],
                )
            )
    return segments


def read_all_segments(output_dir: Path) -> list[Segment]:
    seg_dir = output_dir / SEGMENTS_DIR
    if not seg_dir.is_dir():
        raise PipelineError(f"no segment tables under {seg_dir}; run `align` first")
    segments: list[Segment] = []
    for path in sorted(seg_dir.glob("*.csv")):
        segments.extend(read_segments_csv(path))
    if not segments:
        raise PipelineError(f"no segment tables under {seg_dir}; run `align` first")
    return segments


# ---------------------------------------------------------------------------
# alignment work queue

@dataclass
class BulletinResult:
    source_id: str
    n_fragments: int
    unmatched_chars: int
    audio_hours: float
    error: str = ""


def process_bulletin(
    source_id: str, wav_path: str, txt_path: str, cfg: PipelineConfig
) -> BulletinResult:
    """Decode, synthesize, align and persist one bulletin's segment table."""
    table = mapping_for(cfg)
    raw = Path(txt_path).read_text(encoding=cfg.transcript_encoding)
    fragments, unmatched = decode_transcript(raw, source_id, table)
    if not fragments:
        raise PipelineError(f"{source_id}: transcript has no alignable fragments")
    audio = resample(read_wav(wav_path), cfg.sample_rate)
    segments = align_bulletin(
        fragments, audio, cfg.synth, cfg.features, cfg.band, cfg.metric
    )
    seg_dir = cfg.output_dir / SEGMENTS_DIR
    seg_dir.mkdir(parents=True, exist_ok=True)
    write_segments_csv(segments, seg_dir / f"{source_id}.csv")
    return BulletinResult(
        source_id=source_id,
        n_fragments=len(fragments),
        unmatched_chars=unmatched,
        audio_hours=audio.duration / 3600.0,
    )


def _worker(args: tuple) -> BulletinResult:
    source_id, wav_path, txt_path, cfg = args
    try:
        return process_bulletin(source_id, wav_path, txt_path, cfg)
    except Exception as exc:  # isolate failures per bulletin
        return BulletinResult(source_id, 0, 0, 0.0, error=f"{type(exc).__name__}: {exc}")


def run_alignment(cfg: PipelineConfig) -> list[BulletinResult]:
    bulletins = discover_bulletins(cfg)
    jobs = [(sid, str(wav), str(txt), cfg) for sid, wav, txt in bulletins]
    results: list[BulletinResult] = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for result in pool.map(_worker, jobs):
                results.append(result)
                _log_result(result)
    else:
        for job in jobs:
            result = _worker(job)
            results.append(result)
            _log_result(result)
    return results


def _log_result(result: BulletinResult) -> None:
    if result.error:
        log_json("bulletin_failed", source_id=result.source_id, error=result.error)
    else:
        log_json(
            "bulletin_aligned",
            source_id=result.source_id,
            fragments=result.n_fragments,
            unmatched_chars=result.unmatched_chars,
            audio_hours=round(result.audio_hours, 4),
        )


def write_run_summary(output_dir: Path, command: str, payload: dict) -> Path:
    output_dir.mkdir(parents=True, exist_ok=True)
    summary = {"command": command}
    summary.update(payload)
    path = output_dir / "run_summary.json"
    atomic_write_text(path, json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True) + "\n")
    return path
