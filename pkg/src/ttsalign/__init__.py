"""Forced-alignment corpus builder.

Turns (news-bulletin audio, legacy-encoded transcript) pairs into filtered,
time-stamped speech segments plus ASR-training manifests and dataset
analytics. The alignment reference is synthetic speech generated from the
transcript, warped onto the broadcast audio over MFCC features.
"""

from .audio import PIPELINE_RATE, AudioBuffer, read_wav, resample, slice_buffer, write_wav
from .dtw import BandConfig, WarpPath, align_bulletin, dtw, frame_distance, map_anchors
from .features import FeatureConfig, FeatureMatrix, hz_to_mel, mel_to_hz, mfcc
from .segmenter import FilterConfig, Segment, apply_filters, cut_segments
from .synth import AnchoredSynthesis, SynthBackend, synthesize_fragment, synthesize_sequence
from .textnorm import (
    MappingTable,
    TextFragment,
    decode_legacy,
    default_mapping,
    filter_script,
    fragmentize,
    load_mapping,
)

__version__ = "0.1.0"

__all__ = [
    "AnchoredSynthesis",
    "AudioBuffer",
    "BandConfig",
    "FeatureConfig",
    "FeatureMatrix",
    "FilterConfig",
    "MappingTable",
    "PIPELINE_RATE",
    "Segment",
    "SynthBackend",
    "TextFragment",
    "WarpPath",
    "align_bulletin",
    "apply_filters",
    "cut_segments",
    "decode_legacy",
    "default_mapping",
    "dtw",
    "filter_script",
    "fragmentize",
    "frame_distance",
    "hz_to_mel",
    "load_mapping",
    "map_anchors",
    "mel_to_hz",
    "mfcc",
    "read_wav",
    "resample",
    "slice_buffer",
    "synthesize_fragment",
    "synthesize_sequence",
    "write_wav",
]
