"""End-to-end corpus build: two bulletins from bytes to manifests.

Builds a miniature corpus on disk (KrutiDev transcripts plus matching
audio from the test synthesizer), then drives the same subcommands the
`ttsalign` CLI exposes: align -> filter -> cut -> manifest -> stats.
Everything lands in ./demo_output/.

Run:  python demos/03_full_pipeline.py
"""

import json
from pathlib import Path

import yaml

from ttsalign import SynthBackend, default_mapping, filter_script, fragmentize, write_wav
from ttsalign.cli import main
from ttsalign.synth import synthesize_sequence
from ttsalign.textnorm import decode_legacy

# Real KrutiDev bytes as they would arrive from extracted PDF bulletins.
TRANSCRIPTS = {
    "morning": (
        "ueLdkjA vkdk'kok.kh lekpkj lqfu,A Hkkjr ljdkj us vkt ,d ?kks\"k.kk dhA "
        "çns'k esa u;s fo|ky; [kqysaxsA fo|kFkhZ çlé gSaA f'k{kk dk çlkj gksxkA "
        "ea=h us Hkk\"k.k fn;kA lekpkj lekIr gqvkA vki lcdks /kU;oknA"
    ),
    "evening": (
        "ueLdkj JksrkvksA la/;k lekpkj dk le; gSA uxj esa vkt o\"kkZ gqbZA "
        "fdlku cgqr çlé gSaA ljdkj us lgk;rk dh ?kks\"k.kk dhA "
        "Xjke esa fodkl dk;Z pysA yksx 'kkafr ls jgsA dy fQj feysaxsA 'kqHk jkf=A"
    ),
}

root = Path("demo_output")
audio_dir = root / "audio"
text_dir = root / "transcripts"
out_dir = root / "out"
audio_dir.mkdir(parents=True, exist_ok=True)
text_dir.mkdir(parents=True, exist_ok=True)

table = default_mapping()
backend = SynthBackend(kind="test")
print("building the corpus:")
for source_id, legacy in TRANSCRIPTS.items():
    (text_dir / f"{source_id}.txt").write_text(legacy, encoding="utf-8")
    fragments = fragmentize(filter_script(decode_legacy(legacy, table)), source_id)
    synthesis = synthesize_sequence(fragments, backend)
    write_wav(audio_dir / f"{source_id}.wav", synthesis.audio)
    print(f"  {source_id}: {len(fragments)} fragments, {synthesis.audio.duration:.1f}s audio")

config_path = root / "config.yaml"
config_path.write_text(
    yaml.safe_dump(
        {
            "paths": {
                "audio_dir": str(audio_dir),
                "transcript_dir": str(text_dir),
                "output_dir": str(out_dir),
            },
            "synth": {"kind": "test"},
            "filters": {"drop_head": 2},  # tiny corpus; keep more segments
            "split": {"valid_fraction": 0.3},
            "seed": 0,
        }
    ),
    encoding="utf-8",
)

for command in ("align", "filter", "cut", "manifest", "stats"):
    code = main([command, "--config", str(config_path)])
    summary = json.loads((out_dir / "run_summary.json").read_text(encoding="utf-8"))
    summary.pop("command", None)
    print(f"\n$ ttsalign {command}  (exit {code})")
    print("  " + json.dumps(summary, ensure_ascii=False))

print("\nmanifest_train.jsonl, head:")
for line in (out_dir / "manifest_train.jsonl").read_text(encoding="utf-8").splitlines()[:3]:
    print("  " + line)
print(f"\nartifacts under {out_dir}/")
