"""Run configuration: a flat key=value file plus command-line overrides.

Unknown keys are rejected rather than ignored, so a typo in a config file
fails loudly instead of silently training with defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Mapping, Optional, TextIO

from .errors import ConfigError


@dataclass
class RunConfig:
    dim: int = 300              # embedding dimension
    hidden: int = 150           # LSTM hidden size
    inner_cap: int = 20         # max tokens per verbalized path
    outer_cap: int = 250        # max paths per premise
    n_candidates: int = 4       # potential answers per question
    max_len: int = 3            # max path length (steps)
    hop: int = 3                # candidate search radius
    margin: float = 1.0         # embedding ranking margin
    norm: int = 1               # embedding distance norm (1 or 2)
    lr: float = 0.001           # classifier learning rate
    embed_lr: float = 0.01      # embedding training learning rate
    epochs: int = 30            # classifier epochs
    embed_epochs: int = 100     # embedding training epochs
    batch: int = 32
    dropout: float = 0.2
    threshold: float = 0.5      # entailment decision threshold
    link_threshold: float = 0.85  # entity-linking similarity threshold
    ridge: float = 0.0          # alignment regularization
    answer_pool: int = 50       # candidate cap when answering live questions
    average_tail: int = 0       # average params over the last N epochs
    seed: int = 0
    # Default input locations; the matching command-line flags win.
    kg: str = ""
    qa: str = ""
    embeddings: str = ""
    templates: str = ""
    anchors: str = ""

    def validate(self) -> "RunConfig":
        def positive(name):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("dim", "hidden", "inner_cap", "outer_cap", "n_candidates",
                     "max_len", "hop", "epochs", "embed_epochs", "batch",
                     "answer_pool"):
            positive(name)
        if self.norm not in (1, 2):
            raise ConfigError(f"norm must be 1 or 2, got {self.norm}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if not 0.0 <= self.link_threshold <= 1.0:
            raise ConfigError(
                f"link_threshold must be in [0, 1], got {self.link_threshold}")
        for name in ("margin", "lr", "embed_lr"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.ridge < 0:
            raise ConfigError(f"ridge must be >= 0, got {self.ridge}")
        if self.average_tail < 0 or self.average_tail > self.epochs:
            raise ConfigError(
                f"average_tail must be between 0 and epochs, got {self.average_tail}")
        if self.hop > self.max_len:
            # Candidates sampled at hop distance would have no path within
            # max_len steps and every instance would be dropped.
            raise ConfigError(
                f"hop ({self.hop}) must not exceed max_len ({self.max_len})")
        return self


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    if kind in ("str", str):
        return raw
    try:
        if kind in ("int", int):
            return int(raw)
        return float(raw)
    except ValueError:
        want = "an integer" if kind in ("int", int) else "a number"
        raise ConfigError(f"{name} must be {want}, got {raw!r}") from None


def parse_config_file(source: TextIO) -> dict:
    """key=value lines; blank lines and # comments allowed."""
    values = {}
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _coerce(key, val)
    return values


def make_config(file_values: Optional[Mapping] = None,
                overrides: Optional[Mapping] = None) -> RunConfig:
    """Defaults, then config-file values, then explicit overrides."""
    merged = {}
    for source in (file_values or {}, overrides or {}):
        for key, val in source.items():
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            if val is not None:
                merged[key] = val
    return RunConfig(**merged).validate()


def load_config(path: Optional[str] = None,
                overrides: Optional[Mapping] = None) -> RunConfig:
    file_values = None
    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                file_values = parse_config_file(f)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
    return make_config(file_values, overrides)
