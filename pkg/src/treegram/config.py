"""Run configuration shared by the command-line front end and model metadata.

File format: one ``key = value`` per line, ``#`` starts a comment, ``none``
for an unset value, ``true``/``false`` for flags. Unknown keys are errors.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional

from .tgram import ExtractionConfig


@dataclass(frozen=True)
class RunConfig:
    prehead_order: int = 2
    max_depth: Optional[int] = 5
    max_branching: Optional[int] = None
    max_open: Optional[int] = 4
    max_words: Optional[int] = 3
    min_freq: int = 1
    depth_mode: str = "flat"
    markov: bool = False
    unknown_threshold: int = 0
    beam_width: Optional[int] = None
    beam_margin: Optional[float] = None
    prune: bool = True
    jobs: int = 1
    treebank: Optional[str] = None
    model: Optional[str] = None
    input: Optional[str] = None
    output: Optional[str] = None

    def __post_init__(self):
        if self.prehead_order not in (0, 1, 2):
            raise ValueError("prehead_order must be 0, 1 or 2")
        for name in ("max_depth", "max_branching", "max_open", "max_words"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.min_freq < 0 or self.unknown_threshold < 0:
            raise ValueError("min_freq and unknown_threshold must be non-negative")
        if self.depth_mode not in ("flat", "spine"):
            raise ValueError("depth_mode must be flat or spine")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    def extraction(self) -> ExtractionConfig:
        return ExtractionConfig(self.max_depth, self.max_branching, self.max_open,
                                self.max_words, self.min_freq, self.depth_mode)

    def model_meta(self) -> dict:
        """Settings that determine a trained model."""
        keys = ("prehead_order", "max_depth", "max_branching", "max_open", "max_words",
                "min_freq", "depth_mode", "markov", "unknown_threshold")
        return {k: getattr(self, k) for k in keys}

    def to_text(self) -> str:
        return "".join(f"{f.name} = {_show(getattr(self, f.name))}\n" for f in fields(self))

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            key = key.strip()
            if not sep or key not in types:
                raise ValueError(f"config line {lineno}: cannot use {line!r}")
            values[key] = _read(raw.strip(), types[key], key)
        return cls(**values)

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_text(f.read())

    def as_dict(self) -> dict:
        return asdict(self)


def _show(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _read(raw: str, kind: str, key: str):
    if raw.lower() == "none":
        if "Optional" not in kind:
            raise ValueError(f"{key} cannot be none")
        return None
    if "bool" in kind:
        if raw.lower() not in ("true", "false"):
            raise ValueError(f"{key} expects true or false")
        return raw.lower() == "true"
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw
