"""Strict mono 16-bit PCM WAV reading and writing."""
from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

from .dsp import SAMPLE_RATE
from .errors import AudioFormatError

_SCALE = 32768.0


def read_wav(path, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Read a WAV file into float64 samples in [-1, 1).

    Anything other than mono, 16-bit PCM at ``sample_rate`` is rejected.
    """
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            comp = wf.getcomptype()
            raw = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as exc:
        raise AudioFormatError(f"{path}: not a PCM WAV file ({exc})") from exc
    except OSError as exc:
        raise AudioFormatError(f"{path}: cannot read ({exc})") from exc
    if comp != "NONE":
        raise AudioFormatError(f"{path}: compressed WAV ({comp}) not supported")
    if n_channels != 1:
        raise AudioFormatError(f"{path}: expected mono, got {n_channels} channels")
    if width != 2:
        raise AudioFormatError(f"{path}: expected 16-bit samples, got {8 * width}-bit")
    if rate != sample_rate:
        raise AudioFormatError(f"{path}: expected {sample_rate} Hz, got {rate} Hz")
    return np.frombuffer(raw, dtype="<i2").astype(np.float64) / _SCALE


def to_pcm16(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.clip(np.round(x * _SCALE), -32768, 32767).astype("<i2")


def write_wav(path, x, sample_rate: int = SAMPLE_RATE) -> None:
    """Write float samples as mono 16-bit PCM; values outside [-1, 1) are clipped."""
    pcm = to_pcm16(x)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(sample_rate)
        wf.writeframes(pcm.tobytes())
