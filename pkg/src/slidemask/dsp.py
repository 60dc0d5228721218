"""STFT analysis/synthesis and magnitude normalization.

All processing is done in float64. Spectrograms are laid out time-major,
``(T, F)`` with ``F = frame_len // 2 + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputTooShortError, ShapeError

SAMPLE_RATE = 16000
STD_FLOOR = 1e-8
_WINDOW_FLOOR = 1e-8


@dataclass(frozen=True)
class StftConfig:
    frame_len: int = 128
    hop_len: int = 64
    window: str = "hann"

    def __post_init__(self):
        if self.frame_len < 2 or self.frame_len % 2:
            raise ValueError(f"frame_len must be a positive even integer, got {self.frame_len}")
        if not 0 < self.hop_len <= self.frame_len:
            raise ValueError(f"need 0 < hop_len <= frame_len, got hop_len={self.hop_len}")
        if self.window not in _WINDOWS:
            raise ValueError(f"unknown window {self.window!r}; choose from {sorted(_WINDOWS)}")

    @property
    def n_freq(self) -> int:
        return self.frame_len // 2 + 1

    def hop_seconds(self, sample_rate: int = SAMPLE_RATE) -> float:
        return self.hop_len / sample_rate

    def frame_seconds(self, sample_rate: int = SAMPLE_RATE) -> float:
        return self.frame_len / sample_rate

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.frame_len:
            return 0
        return 1 + (n_samples - self.frame_len) // self.hop_len

    def analysis_window(self) -> np.ndarray:
        return _WINDOWS[self.window](self.frame_len)


@dataclass(frozen=True)
class NormalizationStats:
    mean: float
    std: float

    def invert(self, x: np.ndarray) -> np.ndarray:
        return x * self.std + self.mean


def _hann(n: int) -> np.ndarray:
    # periodic form: exact constant overlap-add at hop n/2
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def _rect(n: int) -> np.ndarray:
    return np.ones(n)


_WINDOWS = {"hann": _hann, "rect": _rect}


def as_waveform(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"waveform must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("waveform contains non-finite samples")
    return x


def frame_signal(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Return a ``(T, frame_len)`` read-only view of overlapping frames.

    Trailing samples that do not fill a whole frame are dropped.
    """
    x = as_waveform(x)
    n_frames = cfg.n_frames(len(x))
    if n_frames == 0:
        raise InputTooShortError(
            f"input too short: {len(x)} samples < frame_len {cfg.frame_len}"
        )
    frames = np.lib.stride_tricks.sliding_window_view(x, cfg.frame_len)
    return frames[:: cfg.hop_len][:n_frames]


def stft(x, cfg: StftConfig = StftConfig()) -> np.ndarray:
    """One-sided STFT, shape ``(T, frame_len // 2 + 1)``, complex128."""
    frames = frame_signal(x, cfg)
    return np.fft.rfft(frames * cfg.analysis_window(), axis=-1)


def istft(spec: np.ndarray, cfg: StftConfig = StftConfig(), length: int | None = None) -> np.ndarray:
    """Weighted overlap-add inverse of :func:`stft`.

    The synthesis window equals the analysis window and the result is divided
    by the overlap-added squared window (floored), so ``istft(stft(x))``
    recovers ``x`` wherever at least one frame has non-negligible weight.
    If ``length`` is given the output is truncated or zero-padded to it.
    """
    spec = np.asarray(spec)
    if spec.ndim != 2:
        raise ShapeError(f"spectrogram must be 2-D (T, F), got shape {spec.shape}")
    n_frames, n_freq = spec.shape
    if n_freq != cfg.n_freq:
        raise ShapeError(
            f"spectrogram has {n_freq} frequency bins, frame_len {cfg.frame_len} needs {cfg.n_freq}"
        )
    win = cfg.analysis_window()
    n_out = (n_frames - 1) * cfg.hop_len + cfg.frame_len if n_frames else 0
    out = np.zeros(n_out)
    norm = np.zeros(n_out)
    if n_frames:
        frames = np.fft.irfft(spec, n=cfg.frame_len, axis=-1) * win
        for t in range(n_frames):
            start = t * cfg.hop_len
            out[start : start + cfg.frame_len] += frames[t]
            norm[start : start + cfg.frame_len] += win * win
    out /= np.maximum(norm, _WINDOW_FLOOR)
    if length is not None:
        if length <= n_out:
            out = out[:length]
        else:
            out = np.concatenate([out, np.zeros(length - n_out)])
    return out


def magnitude(spec) -> np.ndarray:
    return np.abs(np.asarray(spec))


def normalize(mag) -> tuple[np.ndarray, NormalizationStats]:
    """Standardize a magnitude grid with a single utterance-level mean and std."""
    mag = np.asarray(mag, dtype=np.float64)
    if mag.size == 0:
        raise ShapeError("cannot normalize an empty grid")
    mean = float(mag.mean())
    std = max(float(mag.std()), STD_FLOOR)
    return (mag - mean) / std, NormalizationStats(mean, std)
