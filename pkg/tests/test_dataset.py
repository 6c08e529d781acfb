import json

import numpy as np
import pytest

from ttsalign.dataset import (
    ManifestEntry,
    SplitConfig,
    duration_stats,
    entry_for,
    read_manifest,
    split,
    write_gender_csv,
    write_manifest,
    write_stats_csv,
    write_stats_svg,
)
from ttsalign.errors import DatasetError
from ttsalign.segmenter import Segment


def seg(index, start, end, source="b1", text="क"):
    return Segment(
        fragment_index=index, source_id=source, start_s=start, end_s=end, text=text
    )


def corpus_of(source_durations: dict[str, list[float]]):
    segments = []
    for source, durations in source_durations.items():
        t = 0.0
        for i, d in enumerate(durations):
            segments.append(seg(i, t, t + d, source))
            t += d
    return segments


class TestSplit:
    def test_two_equal_sources_one_goes_to_valid(self):
        segments = corpus_of({"a": [5.0, 5.0], "b": [5.0, 5.0]})
        train, valid = split(segments, SplitConfig(valid_fraction=0.07, seed=0))
        valid_sources = {s.source_id for s in valid}
        train_sources = {s.source_id for s in train}
        assert len(valid_sources) == 1
        assert len(train_sources) == 1
        assert valid_sources.isdisjoint(train_sources)

    def test_partition_property(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            n_sources = int(rng.integers(2, 9))
            sources = {
                f"s{k}": [float(rng.uniform(1, 10)) for _ in range(int(rng.integers(1, 6)))]
                for k in range(n_sources)
            }
            segments = corpus_of(sources)
            train, valid = split(segments, SplitConfig(seed=trial))
            key = lambda s: (s.source_id, s.fragment_index)
            assert sorted(map(key, train + valid)) == sorted(map(key, segments))
            assert {s.source_id for s in train}.isdisjoint({s.source_id for s in valid})
            assert valid and train

    def test_no_source_leakage(self):
        rng = np.random.default_rng(1)
        sources = {f"s{k}": [3.0] * 10 for k in range(20)}
        segments = corpus_of(sources)
        for seed in range(10):
            train, valid = split(segments, SplitConfig(seed=seed))
            assert {s.source_id for s in train}.isdisjoint({s.source_id for s in valid})

    def test_fifty_sources_fraction_simulation(self):
        # 50 sources totalling ~10 h; over 20 seeds the valid split stays
        # within [0.6, 0.9] h
        rng = np.random.default_rng(2)
        sources = {
            f"s{k:02d}": [float(rng.uniform(4.8, 14.4)) for _ in range(75)]
            for k in range(50)
        }
        segments = corpus_of(sources)
        total = sum(s.duration for s in segments)
        assert 9.0 <= total / 3600 <= 11.0
        for seed in range(20):
            _, valid = split(segments, SplitConfig(valid_fraction=0.07, seed=seed))
            valid_hours = sum(s.duration for s in valid) / 3600
            assert 0.6 <= valid_hours <= 0.9
            assert abs(valid_hours * 3600 / total - 0.07) <= 0.02

    def test_deterministic_given_seed(self):
        segments = corpus_of({f"s{k}": [5.0, 5.0] for k in range(10)})
        a = split(segments, SplitConfig(seed=7))
        b = split(segments, SplitConfig(seed=7))
        assert [s.fragment_index for s in a[1]] == [s.fragment_index for s in b[1]]
        assert {s.source_id for s in a[1]} == {s.source_id for s in b[1]}

    def test_single_source_rejected(self):
        segments = corpus_of({"only": [5.0, 5.0]})
        with pytest.raises(DatasetError, match="need at least 2"):
            split(segments)

    def test_bad_fraction_rejected(self):
        with pytest.raises(DatasetError):
            SplitConfig(valid_fraction=0.6)


class TestManifest:
    def test_single_entry_format(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_manifest([ManifestEntry("cuts/b1_5.wav", 4.2, "कखग।")], path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        obj = json.loads(lines[0])
        assert obj == {"audio_filepath": "cuts/b1_5.wav", "duration": 4.2, "text": "कखग।"}
        assert "कखग।" in lines[0]  # not ascii-escaped

    def test_empty_manifest(self, tmp_path):
        path = tmp_path / "m.jsonl"
        write_manifest([], path)
        assert path.read_bytes() == b""

    def test_round_trip_thousand_entries(self, tmp_path):
        rng = np.random.default_rng(3)
        entries = [
            ManifestEntry(f"cuts/b{i % 5}_{i}.wav", round(float(rng.uniform(1, 15)), 3), "कख")
            for i in range(1000)
        ]
        path = tmp_path / "m.jsonl"
        write_manifest(entries, path)
        assert read_manifest(path) == entries

    def test_unexpected_keys_rejected(self, tmp_path):
        path = tmp_path / "m.jsonl"
        path.write_text('{"audio_filepath": "x.wav", "duration": 1.0}\n')
        with pytest.raises(DatasetError, match="unexpected keys"):
            read_manifest(path)

    def test_entry_validation(self):
        with pytest.raises(DatasetError):
            ManifestEntry("x.wav", 0.0, "क")
        with pytest.raises(DatasetError):
            ManifestEntry("x.wav", 1.0, "")

    def test_entry_for_rounds_to_3_decimals(self):
        s = seg(5, 0.0, 1.23456789)
        assert entry_for(s, "cuts/b1_5.wav").duration == 1.235


class TestDurationStats:
    def test_example_histogram(self):
        segments = [seg(0, 0.0, 4.2), seg(1, 10.0, 19.8), seg(2, 30.0, 34.7)]
        stats = duration_stats(segments)
        hist = {(a, b): c for a, b, c in stats["histogram"]}
        assert hist[(4.0, 5.0)] == 2
        assert hist[(9.0, 10.0)] == 1
        assert stats["total_hours"] == pytest.approx(18.7 / 3600, abs=1e-12)

    def test_empty(self):
        stats = duration_stats([])
        assert stats["total_hours"] == 0.0
        assert all(c == 0 for _, _, c in stats["histogram"])
        assert len(stats["histogram"]) == 15

    def test_conservation(self):
        rng = np.random.default_rng(4)
        segments = []
        t = 0.0
        for i in range(500):
            d = float(rng.gamma(4.0, 1.5))
            segments.append(seg(i, t, t + d, source=f"s{i % 7}"))
            t += d
        stats = duration_stats(segments)
        assert sum(c for _, _, c in stats["histogram"]) == 500
        total = sum(s.duration for s in segments) / 3600
        assert stats["total_hours"] == pytest.approx(total, abs=1e-6)
        assert sum(stats["per_source_hours"].values()) == pytest.approx(total, abs=1e-9)

    def test_right_open_bins(self):
        stats = duration_stats([seg(0, 0.0, 4.0)])
        hist = {(a, b): c for a, b, c in stats["histogram"]}
        assert hist[(4.0, 5.0)] == 1
        assert hist[(3.0, 4.0)] == 0

    def test_csv_and_svg_outputs(self, tmp_path):
        segments = [seg(0, 0.0, 4.2), seg(1, 10.0, 16.0)]
        stats = duration_stats(segments)
        write_stats_csv(stats, tmp_path / "stats.csv")
        lines = (tmp_path / "stats.csv").read_text().splitlines()
        assert lines[0] == "bin_start_s,bin_end_s,count"
        assert "4.0,5.0,1" in lines
        write_stats_svg(stats, tmp_path / "stats.svg")
        svg = (tmp_path / "stats.svg").read_text()
        assert svg.startswith("<svg")
        assert svg.count("<rect") == len(stats["histogram"])

    def test_gender_csv(self, tmp_path):
        write_gender_csv(17.41, 16.25, tmp_path / "gender.csv")
        assert (tmp_path / "gender.csv").read_text() == (
            "label,hours\nmale,17.41\nfemale,16.25\n"
        )
