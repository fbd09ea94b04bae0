"""Pipeline configuration and its flat ``key = value`` file format.

One setting per line. A line starting with ``#``, or the rest of a line
after `` #``, is a comment. Keys are dotted paths into
the configuration (``preprocess.guided_radius``, ``train.rf.n_trees``,
``protocol.k``). Values are JSON literals (``8``, ``0.01``, ``true``,
``[0, 45]``, ``"text"``); anything that is not valid JSON is taken as a
bare string. Unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path

from .classify import TrainConfig
from .dataset import AugmentConfig
from .features import GlcmConfig
from .preprocess import PreprocessConfig
from .segment import KMeansConfig

__all__ = ["PipelineConfig", "ConfigError", "parse_config", "load_config", "apply_overrides", "FEATURE_SOURCES"]

FEATURE_SOURCES = ("gray", "lightness", "original")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    segment: KMeansConfig = field(default_factory=KMeansConfig)
    glcm: GlcmConfig = field(default_factory=GlcmConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    protocol: str = "kfold"
    k: int = 5
    fraction: float = 0.66
    seed: int = 0
    output_dir: str = "."
    # grayscale source for texture features; see FEATURE_SOURCES
    feature_source: str = "gray"

    def __post_init__(self):
        if self.protocol not in ("kfold", "holdout"):
            raise ConfigError("protocol must be 'kfold' or 'holdout'")
        if self.k < 2:
            raise ConfigError("protocol.k must be >= 2")
        if not 0 < self.fraction < 1:
            raise ConfigError("protocol.fraction must lie in (0, 1)")
        if self.feature_source not in FEATURE_SOURCES:
            raise ConfigError(f"features.source must be one of {FEATURE_SOURCES}")

    def with_seed(self, seed: int) -> "PipelineConfig":
        """Propagate one seed into every seeded stage."""
        return replace(
            self,
            seed=seed,
            segment=replace(self.segment, seed=seed),
            train=replace(self.train, seed=seed),
            augment=replace(self.augment, seed=seed),
        )


# dotted aliases that do not mirror the attribute path
_ALIASES = {
    "protocol": ("protocol",),
    "protocol.name": ("protocol",),
    "protocol.k": ("k",),
    "protocol.fraction": ("fraction",),
    "features.source": ("feature_source",),
}


def _parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_config(text: str) -> dict:
    """Parse the flat format into ``{dotted_key: value}``."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if " #" in line:
            line = line.split(" #", 1)[0].strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = _parse_value(value)
    return out


def _coerce(current, value, key):
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false")
        return value
    if isinstance(current, int) and not isinstance(current, bool):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"{key}: expected an integer")
        return int(value)
    if isinstance(current, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number")
        return float(value)
    if isinstance(current, tuple):
        if not isinstance(value, list):
            raise ConfigError(f"{key}: expected a list")
        return tuple(value)
    return value


def _set(obj, path, value, key):
    name = path[0]
    names = {f.name for f in fields(obj)}
    if name not in names:
        raise ConfigError(f"unknown configuration key {key!r}")
    current = getattr(obj, name)
    if len(path) == 1:
        if is_dataclass(current):
            raise ConfigError(f"{key!r} names a section, not a setting")
        return replace(obj, **{name: _coerce(current, value, key) if current is not None else value})
    if not is_dataclass(current):
        raise ConfigError(f"unknown configuration key {key!r}")
    return replace(obj, **{name: _set(current, path[1:], value, key)})


def apply_overrides(cfg: PipelineConfig, settings: dict) -> PipelineConfig:
    if "seed" in settings:
        cfg = cfg.with_seed(_coerce(0, settings["seed"], "seed"))
    for key, value in settings.items():
        if key == "seed":
            continue
        path = _ALIASES.get(key, tuple(key.split(".")))
        try:
            cfg = _set(cfg, path, value, key)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{key}: {exc}") from exc
    return cfg


def load_config(path=None, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = base or PipelineConfig()
    if path is None:
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return apply_overrides(cfg, parse_config(text))
