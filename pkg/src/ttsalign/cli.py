"""Command-line front end: one subcommand per pipeline stage.

Exit codes: 0 success, 1 processing error, 2 configuration/usage error.
Every command writes a machine-readable run summary into the output
directory and logs JSON lines to stderr.
"""

from __future__ import annotations

import argparse
import sys
from collections import Counter
from pathlib import Path

from dataclasses import replace

from . import analytics, dataset, pipeline, segmenter
from .audio import read_wav, resample
from .config import PipelineConfig, apply_overrides, load_config
from .errors import ConfigError, PipelineError
from .pipeline import CUTS_DIR, FRAGMENTS_DIR, SEGMENTS_DIR, log_json, write_run_summary


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML pipeline config file")
    parser.add_argument("--output-dir", dest="paths.output_dir")
    parser.add_argument("--audio-dir", dest="paths.audio_dir")
    parser.add_argument("--transcript-dir", dest="paths.transcript_dir")
    parser.add_argument("--mapping-table", dest="paths.mapping_table")
    parser.add_argument("--embeddings", dest="paths.embeddings")
    parser.add_argument("--gender-labels", dest="paths.gender_labels")
    parser.add_argument("--gender-model", dest="paths.gender_model")
    parser.add_argument("--seed", type=int, dest="seed")
    parser.add_argument("--workers", type=int, dest="workers")
    parser.add_argument("--metric", choices=["euclidean", "cosine"], dest="metric")
    parser.add_argument("--transcript-encoding", dest="transcript_encoding")
    parser.add_argument("--radius-s", type=float, dest="band.radius_s")
    parser.add_argument("--drop-head", type=int, dest="filters.drop_head")
    parser.add_argument("--max-dur-s", type=float, dest="filters.max_dur_s")
    parser.add_argument("--min-dur-s", type=float, dest="filters.min_dur_s")
    parser.add_argument("--valid-fraction", type=float, dest="split.valid_fraction")
    parser.add_argument("--synth-kind", choices=["external", "test"], dest="synth.kind")
    parser.add_argument("--voice", dest="synth.voice")
    parser.add_argument("--cos-threshold", type=float, dest="cos_threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttsalign",
        description="Forced-alignment corpus builder for legacy-encoded news bulletins",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("decode-text", "decode legacy transcripts into fragment tables"),
        ("align", "synthesize, warp and time-stamp every bulletin"),
        ("filter", "assign kept/rejected statuses and write the rejection report"),
        ("cut", "write one WAV per kept segment"),
        ("manifest", "split by bulletin and write train/valid JSONL manifests"),
        ("stats", "duration histogram and totals (CSV + SVG)"),
        ("train-gender", "train the RBF-SVM gender classifier on labelled embeddings"),
        ("classify-gender", "predict per-segment gender and total hours per label"),
        ("speakers", "estimate speaker count by greedy cosine clustering"),
    ]:
        cmd = sub.add_parser(name, help=help_text)
        _add_common(cmd)
    return parser


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config)
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in ("command", "config") and value is not None
    }
    return apply_overrides(cfg, overrides)


# ---------------------------------------------------------------------------
# commands

def cmd_decode_text(cfg: PipelineConfig) -> dict:
    cfg.require_paths("transcript_dir")
    table = pipeline.mapping_for(cfg)
    frag_dir = cfg.output_dir / FRAGMENTS_DIR
    frag_dir.mkdir(parents=True, exist_ok=True)
    transcripts = sorted(Path(cfg.paths.transcript_dir).glob("*.txt"))
    if not transcripts:
        raise ConfigError(f"no .txt transcripts under {cfg.paths.transcript_dir}")
    total_fragments = 0
    total_unmatched = 0
    for txt in transcripts:
        raw = txt.read_text(encoding=cfg.transcript_encoding)
        fragments, unmatched = pipeline.decode_transcript(raw, txt.stem, table)
        lines = [f"{frag.index}\t{frag.text}" for frag in fragments]
        pipeline.atomic_write_text(
            frag_dir / f"{txt.stem}.tsv", "\n".join(lines) + ("\n" if lines else "")
        )
        total_fragments += len(fragments)
        total_unmatched += unmatched
        log_json(
            "transcript_decoded",
            source_id=txt.stem,
            fragments=len(fragments),
            unmatched_chars=unmatched,
        )
    return {
        "sources_processed": len(transcripts),
        "fragments": total_fragments,
        "unmatched_chars": total_unmatched,
    }


def cmd_align(cfg: PipelineConfig) -> dict:
    cfg.require_paths("audio_dir", "transcript_dir")
    results = pipeline.run_alignment(cfg)
    failed = sorted(r.source_id for r in results if r.error)
    ok = [r for r in results if not r.error]
    summary = {
        "sources_processed": len(ok),
        "sources_failed": failed,
        "fragments": sum(r.n_fragments for r in ok),
        "unmatched_chars": sum(r.unmatched_chars for r in ok),
        "hours": round(sum(r.audio_hours for r in ok), 2),
        "seed": cfg.seed,
    }
    if failed:
        err = PipelineError(f"alignment failed for: {failed}")
        err.summary = summary  # main still records the partial run
        raise err
    return summary


def cmd_filter(cfg: PipelineConfig) -> dict:
    segments = pipeline.read_all_segments(cfg.output_dir)
    filtered = segmenter.apply_filters(segments, cfg.filters)
    by_source: dict[str, list] = {}
    for seg in filtered:
        by_source.setdefault(seg.source_id, []).append(seg)
    seg_dir = cfg.output_dir / SEGMENTS_DIR
    for source_id, rows in sorted(by_source.items()):
        pipeline.write_segments_csv(rows, seg_dir / f"{source_id}.csv")
    segmenter.write_rejection_report(filtered, cfg.output_dir / "rejection_report.csv")
    reasons = Counter(s.reject_reason for s in filtered if s.status == "rejected")
    kept = [s for s in filtered if s.status == "kept"]
    return {
        "segments": len(filtered),
        "kept": len(kept),
        "rejected": dict(sorted(reasons.items())),
        "kept_hours": round(sum(s.duration for s in kept) / 3600.0, 2),
    }


def cmd_cut(cfg: PipelineConfig) -> dict:
    cfg.require_paths("audio_dir")
    segments = pipeline.read_all_segments(cfg.output_dir)
    kept = [s for s in segments if s.status == "kept"]
    cut_dir = cfg.output_dir / CUTS_DIR
    cut_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for source_id in sorted({s.source_id for s in kept}):
        wav_path = Path(cfg.paths.audio_dir) / f"{source_id}.wav"
        if not wav_path.is_file():
            raise PipelineError(f"missing audio for cut: {wav_path}")
        audio = resample(read_wav(wav_path), cfg.sample_rate)
        files = segmenter.cut_segments(
            audio, [s for s in kept if s.source_id == source_id], cut_dir
        )
        written += len(files)
        log_json("source_cut", source_id=source_id, files=len(files))
    return {"kept_segments": len(kept), "files_written": written}


def cmd_manifest(cfg: PipelineConfig) -> dict:
    segments = pipeline.read_all_segments(cfg.output_dir)
    kept = [s for s in segments if s.status == "kept"]
    if not kept:
        raise PipelineError("no kept segments; run `filter` first")
    cut_dir = cfg.output_dir / CUTS_DIR

    def entry(seg):
        rel = f"{CUTS_DIR}/{seg.source_id}_{seg.fragment_index}.wav"
        if not (cut_dir / f"{seg.source_id}_{seg.fragment_index}.wav").is_file():
            raise PipelineError(f"cut file missing for manifest: {rel}; run `cut` first")
        return dataset.entry_for(seg, rel)

    # split.seed = 0 inherits the global seed so one flag replays the run
    split_cfg = cfg.split if cfg.split.seed else replace(cfg.split, seed=cfg.seed)
    train, valid = dataset.split(kept, split_cfg)
    dataset.write_manifest([entry(s) for s in train], cfg.output_dir / "manifest_train.jsonl")
    dataset.write_manifest([entry(s) for s in valid], cfg.output_dir / "manifest_valid.jsonl")
    train_h = sum(s.duration for s in train) / 3600.0
    valid_h = sum(s.duration for s in valid) / 3600.0
    return {
        "train_segments": len(train),
        "valid_segments": len(valid),
        "train_hours": round(train_h, 2),
        "valid_hours": round(valid_h, 2),
        "valid_sources": sorted({s.source_id for s in valid}),
        "seed": split_cfg.seed,
    }


def cmd_stats(cfg: PipelineConfig) -> dict:
    segments = pipeline.read_all_segments(cfg.output_dir)
    kept = [s for s in segments if s.status == "kept"]
    stats = dataset.duration_stats(kept, cfg.filters.max_dur_s)
    dataset.write_stats_csv(stats, cfg.output_dir / "stats.csv")
    dataset.write_stats_svg(stats, cfg.output_dir / "stats.svg")
    return {
        "kept_segments": len(kept),
        "total_hours": round(stats["total_hours"], 2),
        "per_source_hours": {k: round(v, 2) for k, v in stats["per_source_hours"].items()},
    }


def _load_labels(path: Path) -> dict[tuple[str, int], str]:
    labels: dict[tuple[str, int], str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3 or fields[2] not in (analytics.MALE, analytics.FEMALE):
            raise ConfigError(f"{path}: line {lineno}: expected source_id<TAB>index<TAB>male|female")
        labels[(fields[0], int(fields[1]))] = fields[2]
    if not labels:
        raise ConfigError(f"{path}: no labels")
    return labels


def cmd_train_gender(cfg: PipelineConfig) -> dict:
    cfg.require_paths("embeddings", "gender_labels")
    embeddings = analytics.load_embeddings(cfg.paths.embeddings)
    labels = _load_labels(Path(cfg.paths.gender_labels))
    pairs = [(e, labels[(e.source_id, e.index)]) for e in embeddings
             if (e.source_id, e.index) in labels]
    if not pairs:
        raise PipelineError("no embedding has a matching label")
    X = [e for e, _ in pairs]
    y = [label for _, label in pairs]
    model = analytics.train_svm(X, y, gamma=cfg.svm_gamma, C=cfg.svm_C, seed=cfg.seed)
    model_path = cfg.paths.gender_model or str(cfg.output_dir / "gender_model.txt")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    analytics.save_model(model, model_path)
    correct = sum(analytics.predict(model, e) == label for e, label in pairs)
    return {
        "training_points": len(pairs),
        "support_vectors": len(model.alphas),
        "train_accuracy": round(correct / len(pairs), 4),
        "model_path": str(model_path),
        "gamma": cfg.svm_gamma,
        "C": cfg.svm_C,
    }


def cmd_classify_gender(cfg: PipelineConfig) -> dict:
    cfg.require_paths("embeddings", "gender_model")
    model = analytics.load_model(cfg.paths.gender_model)
    embeddings = analytics.load_embeddings(cfg.paths.embeddings)
    predictions = {
        (e.source_id, e.index): analytics.predict(model, e) for e in embeddings
    }
    segments = pipeline.read_all_segments(cfg.output_dir)
    kept = [s for s in segments if s.status == "kept"]
    male_h, female_h = analytics.gender_hours(kept, predictions)
    dataset.write_gender_csv(male_h, female_h, cfg.output_dir / "gender.csv")
    lines = ["source_id,index,label"]
    for (source_id, index), label in sorted(predictions.items()):
        lines.append(f"{source_id},{index},{label}")
    pipeline.atomic_write_text(
        cfg.output_dir / "gender_predictions.csv", "\n".join(lines) + "\n"
    )
    return {
        "segments_classified": len(kept),
        "male_hours": round(male_h, 2),
        "female_hours": round(female_h, 2),
    }


def cmd_speakers(cfg: PipelineConfig) -> dict:
    cfg.require_paths("embeddings")
    embeddings = analytics.load_embeddings(cfg.paths.embeddings)
    n_clusters, assignments = analytics.estimate_speakers(embeddings, cfg.cos_threshold)
    lines = ["source_id,index,cluster"]
    for emb, cluster in zip(embeddings, assignments):
        lines.append(f"{emb.source_id},{emb.index},{cluster}")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    pipeline.atomic_write_text(cfg.output_dir / "speakers.csv", "\n".join(lines) + "\n")
    return {"embeddings": len(embeddings), "estimated_speakers": n_clusters}


_COMMANDS = {
    "decode-text": cmd_decode_text,
    "align": cmd_align,
    "filter": cmd_filter,
    "cut": cmd_cut,
    "manifest": cmd_manifest,
    "stats": cmd_stats,
    "train-gender": cmd_train_gender,
    "classify-gender": cmd_classify_gender,
    "speakers": cmd_speakers,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = None
    try:
        cfg = _config_from_args(args)
        summary = _COMMANDS[args.command](cfg)
        summary["seed"] = summary.get("seed", cfg.seed)
        path = write_run_summary(cfg.output_dir, args.command, summary)
        log_json("done", command=args.command, summary=str(path))
        return 0
    except ConfigError as exc:
        log_json("config_error", command=args.command, error=str(exc))
        return 2
    except PipelineError as exc:
        partial = getattr(exc, "summary", None)
        if partial is not None and cfg is not None:
            write_run_summary(cfg.output_dir, args.command, partial)
        log_json("processing_error", command=args.command, error=str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
