"""Exception hierarchy shared across the pipeline.

Every error raised by this package derives from PipelineError so callers
can distinguish pipeline failures from programming errors. ConfigError is
kept separate because the CLI maps it to a different exit code.
"""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PipelineError):
    """Invalid configuration or command-line usage."""


class MappingTableError(PipelineError):
    """Malformed or inconsistent legacy-font mapping table."""


class AudioFormatError(PipelineError):
    """Unreadable or unsupported audio file."""


class FeatureError(PipelineError):
    """Feature extraction preconditions violated."""


class SynthBackendError(PipelineError):
    """TTS backend failed; carries captured diagnostics."""

    def __init__(self, message: str, *, stderr: str = "", fragment_index: int | None = None):
        super().__init__(message)
        self.stderr = stderr
        self.fragment_index = fragment_index


class BandError(PipelineError):
    """DTW band cannot contain a feasible warp path."""


class AlignmentError(PipelineError):
    """A stage of the alignment chain failed; message carries the stage label."""


class SegmentError(PipelineError):
    """Segment filtering or cutting contract violated."""


class EmbeddingError(PipelineError):
    """Embedding file or model file malformed."""


class DatasetError(PipelineError):
    """Manifest or split construction failed."""
