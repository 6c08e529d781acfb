"""Fixture corpus: three synthetic bulletins with known ground truth.

Each bulletin's "real" audio is the test synthesizer's own output for its
fragments, so alignment must recover the synthesis anchors. Transcripts
are written in legacy (KrutiDev) encoding produced by the test-side
encoder and round-trip-checked against the production decoder.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

from helpers import encode_legacy
from ttsalign.audio import AudioBuffer, concat, write_wav
from ttsalign.synth import AnchoredSynthesis, SynthBackend, synthesize_sequence
from ttsalign.textnorm import TextFragment, default_mapping, filter_script, fragmentize

import numpy as np

# Nine sentences per bulletin: five fall to the head drop, the rest stay.
# bulletin_b carries one overlong "music interlude" sentence (>126
# codepoints = >15.12 s with the test synthesizer) that filtering must drop.
_LONG_SENTENCE = (
    "आकाशवाणी समाचार में आज भारत सरकार ने एक परीक्षण की घोषणा की और "
    "प्रदेश के विद्यार्थी इस समाचार को सुनकर विद्यालय की ओर चले गये "
    "तथा नगर के लोग शांति से अपने काम में लगे रहे।"
)

BULLETIN_SENTENCES = {
    "bulletin_a": (
        "नमस्कार। आकाशवाणी समाचार सुनिए। भारत सरकार ने कहा। "
        "यह एक परीक्षण है। प्रदेश में शिक्षा का प्रसार हुआ। "
        "विद्यार्थी विद्यालय गये। राम ने उत्तर दिया। "
        "समाचार समाप्त हुआ। आप सबको धन्यवाद।"
    ),
    "bulletin_b": (
        "नमस्कार श्रोताओ। समाचार का समय है। नगर में वर्षा हुई। "
        "किसान प्रसन्न हैं। सरकार ने सहायता दी। विद्यालय खुले रहे। "
        + _LONG_SENTENCE + " "
        "कल फिर मिलेंगे। शुभ रात्रि।"
    ),
    "bulletin_c": (
        "आकाशवाणी से समाचार। आज का दिन शुभ है। भारत ने करार किया। "
        "शिक्षा पर चर्चा हुई। ग्राम में विकास हुआ। "
        "लोग प्रसन्न हैं। मंत्री ने भाषण दिया। "
        "समाचार यहीं समाप्त होते हैं। सबको नमस्कार।"
    ),
}


@dataclass
class FixtureBulletin:
    source_id: str
    audio_path: Path
    transcript_path: Path
    fragments: list[TextFragment]
    synthesis: AnchoredSynthesis


@dataclass
class FixtureCorpus:
    root: Path
    audio_dir: Path
    transcript_dir: Path
    bulletins: dict[str, FixtureBulletin]


def build_corpus(
    root: Path,
    sentences: dict[str, str] | None = None,
    silence_prefix_s: float = 0.0,
) -> FixtureCorpus:
    sentences = sentences or BULLETIN_SENTENCES
    table = default_mapping()
    audio_dir = root / "audio"
    transcript_dir = root / "transcripts"
    audio_dir.mkdir(parents=True, exist_ok=True)
    transcript_dir.mkdir(parents=True, exist_ok=True)
    backend = SynthBackend(kind="test")

    bulletins: dict[str, FixtureBulletin] = {}
    for source_id, text in sentences.items():
        fragments = fragmentize(filter_script(text), source_id)
        assert fragments, f"fixture sentence set for {source_id} produced no fragments"
        synthesis = synthesize_sequence(fragments, backend)
        audio = synthesis.audio
        if silence_prefix_s > 0:
            pad = AudioBuffer(
                samples=np.zeros(int(silence_prefix_s * audio.sample_rate)),
                sample_rate=audio.sample_rate,
            )
            audio = concat([pad, audio])
        wav_path = audio_dir / f"{source_id}.wav"
        write_wav(wav_path, audio)

        legacy = encode_legacy(text, table)
        txt_path = transcript_dir / f"{source_id}.txt"
        txt_path.write_text(legacy, encoding="utf-8")

        # the decoder must reproduce exactly what was synthesized
        from ttsalign.textnorm import decode_legacy

        roundtrip = fragmentize(filter_script(decode_legacy(legacy, table)), source_id)
        assert [f.text for f in roundtrip] == [f.text for f in fragments], source_id

        bulletins[source_id] = FixtureBulletin(
            source_id=source_id,
            audio_path=wav_path,
            transcript_path=txt_path,
            fragments=fragments,
            synthesis=synthesis,
        )
    return FixtureCorpus(
        root=root, audio_dir=audio_dir, transcript_dir=transcript_dir, bulletins=bulletins
    )


@pytest.fixture(scope="session")
def corpus(tmp_path_factory) -> FixtureCorpus:
    return build_corpus(tmp_path_factory.mktemp("corpus"))
