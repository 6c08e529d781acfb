"""Pipeline configuration: a YAML file of nested sections plus flag overrides.

Every knob of the pipeline lives here so a run is reproducible from one
recorded artifact. Validation happens before any processing; missing or
out-of-range values raise ConfigError, which the CLI maps to exit code 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import yaml

from .dtw import BandConfig
from .dataset import SplitConfig
from .errors import ConfigError
from .features import FeatureConfig
from .segmenter import FilterConfig
from .synth import SynthBackend


@dataclass
class PathsConfig:
    audio_dir: str = ""
    transcript_dir: str = ""
    mapping_table: str = ""  # empty = packaged KrutiDev-010 table
    output_dir: str = "out"
    embeddings: str = ""
    gender_labels: str = ""
    gender_model: str = ""


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    band: BandConfig = field(default_factory=BandConfig)
    filters: FilterConfig = field(default_factory=FilterConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    synth: SynthBackend = field(default_factory=SynthBackend)
    metric: str = "euclidean"
    workers: int = 1
    seed: int = 0
    sample_rate: int = 16000
    transcript_encoding: str = "utf-8"
    cos_threshold: float = 0.75
    svm_gamma: float = 0.01
    svm_C: float = 100.0

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.metric not in ("euclidean", "cosine"):
            raise ConfigError(f"metric must be euclidean or cosine, got {self.metric!r}")
        if self.sample_rate <= 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        if not 0 < self.cos_threshold <= 1:
            raise ConfigError(f"cos_threshold must be in (0, 1], got {self.cos_threshold}")

    @property
    def output_dir(self) -> Path:
        return Path(self.paths.output_dir)

    def require_paths(self, *names: str) -> None:
        """Check that the named path fields exist before any processing."""
        for name in names:
            value = getattr(self.paths, name)
            if not value:
                raise ConfigError(f"paths.{name} is required for this command")
            target = Path(value)
            if name.endswith("_dir"):
                if not target.is_dir():
                    raise ConfigError(f"paths.{name}: directory not found: {target}")
            elif not target.is_file():
                raise ConfigError(f"paths.{name}: file not found: {target}")


def _build_section(cls, data: dict, section: str):
    known = {f.name for f in dc_fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    try:
        return cls(**data)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid [{section}] section: {exc}") from exc


_SECTIONS = {
    "paths": PathsConfig,
    "features": FeatureConfig,
    "band": BandConfig,
    "filters": FilterConfig,
    "split": SplitConfig,
    "synth": SynthBackend,
}


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a YAML config file; None gives all defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: cannot parse YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    kwargs = {}
    scalar_fields = {
        f.name for f in dc_fields(PipelineConfig) if f.name not in _SECTIONS
    }
    for key, value in raw.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{path}: section {key!r} must be a mapping")
            kwargs[key] = _build_section(_SECTIONS[key], value, key)
        elif key in scalar_fields:
            kwargs[key] = value
        else:
            raise ConfigError(f"{path}: unknown top-level key {key!r}")
    try:
        return PipelineConfig(**kwargs)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def apply_overrides(cfg: PipelineConfig, overrides: dict) -> PipelineConfig:
    """Rebuild the config with dotted-key overrides (flags win over file)."""
    from dataclasses import replace

    sections: dict[str, dict] = {}
    scalars: dict = {}
    for dotted, value in overrides.items():
        if value is None:
            continue
        if "." in dotted:
            section, key = dotted.split(".", 1)
            if section not in _SECTIONS:
                raise ConfigError(f"unknown config section {section!r}")
            sections.setdefault(section, {})[key] = value
        else:
            scalars[dotted] = value

    for section, values in sections.items():
        current = getattr(cfg, section)
        known = {f.name for f in dc_fields(type(current))}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        try:
            cfg = replace(cfg, **{section: replace(current, **values)})
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"invalid override for [{section}]: {exc}") from exc
    if scalars:
        try:
            cfg = replace(cfg, **scalars)
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"invalid override: {exc}") from exc
    return cfg
