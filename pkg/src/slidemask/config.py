"""Sectioned key/value run configuration (INI syntax).

Every key has a default; unknown sections or keys are rejected. ``to_text``
emits a normalized form that parses back to the same configuration.
"""
from __future__ import annotations

import configparser
from pathlib import Path

from .context import ContextWindowConfig
from .dsp import StftConfig
from .errors import ConfigError

DEFAULTS: dict[str, dict[str, object]] = {
    "stft": {"frame_len": 128, "hop_len": 64, "window": "hann", "sample_rate": 16000},
    "model": {"architecture": "cdae"},
    "context": {"w_in": 1, "w_out": 1},
    "train": {
        "learning_rate": 5e-4,
        "batch_size": 32,
        "epochs": 50,
        "chunk_frames": 100,
        "seed": 0,
    },
    "data": {"seed": 0, "count": 64, "snr_db": ""},
    "eval": {"beta": 0.5, "snr_buckets": "-5,0,10,20"},
}


def _coerce(section: str, key: str, raw: str):
    default = DEFAULTS[section][key]
    try:
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc
    return raw.strip()


class RunConfig:
    def __init__(self, values: dict | None = None):
        self.values = {s: dict(kv) for s, kv in DEFAULTS.items()}
        for section, kv in (values or {}).items():
            for key, value in kv.items():
                self.set(section, key, value)

    def set(self, section: str, key: str, value) -> None:
        if section not in DEFAULTS:
            raise ConfigError(f"unknown config section [{section}]")
        if key not in DEFAULTS[section]:
            raise ConfigError(f"unknown config key [{section}] {key}")
        self.values[section][key] = _coerce(section, key, str(value))

    def get(self, section: str, key: str):
        return self.values[section][key]

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        cfg = cls()
        for section in parser.sections():
            for key, raw in parser.items(section):
                cfg.set(section, key, raw)
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_text(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config ({exc})") from exc

    def to_text(self) -> str:
        lines = []
        for section in DEFAULTS:
            lines.append(f"[{section}]")
            for key in DEFAULTS[section]:
                value = self.values[section][key]
                lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
            lines.append("")
        return "\n".join(lines)

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    def stft_config(self) -> StftConfig:
        s = self.values["stft"]
        return StftConfig(s["frame_len"], s["hop_len"], s["window"])

    def context_config(self) -> ContextWindowConfig:
        c = self.values["context"]
        return ContextWindowConfig(c["w_in"], c["w_out"])

    def snr_buckets(self) -> tuple[float, ...]:
        raw = self.values["eval"]["snr_buckets"]
        try:
            return tuple(float(v) for v in raw.split(","))
        except ValueError as exc:
            raise ConfigError(f"[eval] snr_buckets: cannot parse {raw!r}") from exc
