"""Synthesis of (clean, noise, noisy) training triplets.

For each example a noise file fills a 10 s clip, clean speech segments are
drawn and concatenated until the clip is full, each segment gets a random
gain and exponential fade in/out, both tracks are peak-normalized, and they
are mixed at a random SNR. Everything is a pure function of the manifest,
the seed and the example index.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import dsp
from ..audio import read_wav
from ..errors import DataError

CLIP_SECONDS = 10.0
SNR_RANGE_DB = (-5.0, 20.0)
GAIN_RANGE_DB = (-3.0, 3.0)
FADE_RANGE_S = (0.20, 0.30)
FADE_FLOOR = 0.001
FADE_RATE = 6.908  # ln(1000): 60 dB of range over the fade


def fade_gain(t_norm: float) -> float:
    """Fade-in gain at normalized time ``t_norm`` in [0, 1]; 0.001 at the start."""
    if not 0.0 <= t_norm <= 1.0:
        raise ValueError(f"normalized fade time must be in [0, 1], got {t_norm}")
    return min(FADE_FLOOR * math.exp(FADE_RATE * t_norm), 1.0)


def fade_curve(n: int) -> np.ndarray:
    """Rising fade-in gains for ``n`` samples (``n >= 2``), first 0.001, last 1."""
    t = np.linspace(0.0, 1.0, n)
    return np.minimum(FADE_FLOOR * np.exp(FADE_RATE * t), 1.0)


def apply_fades(x, fade_s: float, sample_rate: int = dsp.SAMPLE_RATE) -> np.ndarray:
    """Apply a fade-in and its time-reversed fade-out to a copy of ``x``.

    The fade length is capped at half the signal so the two never overlap.
    """
    x = np.array(x, dtype=np.float64)
    n = min(int(round(fade_s * sample_rate)), len(x) // 2)
    if n >= 2:
        curve = fade_curve(n)
        x[:n] *= curve
        x[-n:] *= curve[::-1]
    return x


def db_to_gain(db: float) -> float:
    return 10.0 ** (db / 20.0)


def peak_normalize(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    peak = np.max(np.abs(x)) if x.size else 0.0
    if peak == 0.0:
        return x.copy()
    return x / peak


@dataclass(frozen=True)
class MixSpec:
    """Random draws that define one example.

    ``segment_fades_s`` and ``noise_fade_s`` are drawn independently.
    """

    snr_db: float
    segment_gains_db: tuple = ()
    segment_fades_s: tuple = ()
    noise_fade_s: float = 0.25
    seed: int = 0
    index: int = 0
    clip_s: float = field(default=CLIP_SECONDS, init=False)

    def __post_init__(self):
        lo, hi = SNR_RANGE_DB
        if not lo <= self.snr_db <= hi:
            raise ValueError(f"snr_db {self.snr_db} outside [{lo}, {hi}]")
        if len(self.segment_gains_db) != len(self.segment_fades_s):
            raise ValueError("need one gain and one fade per segment")
        for g in self.segment_gains_db:
            if not GAIN_RANGE_DB[0] <= g <= GAIN_RANGE_DB[1]:
                raise ValueError(f"segment gain {g} dB outside {GAIN_RANGE_DB}")
        for f in (*self.segment_fades_s, self.noise_fade_s):
            if not FADE_RANGE_S[0] <= f <= FADE_RANGE_S[1]:
                raise ValueError(f"fade {f} s outside {FADE_RANGE_S}")

    def clip_samples(self, sample_rate: int = dsp.SAMPLE_RATE) -> int:
        return int(round(self.clip_s * sample_rate))


def build_clean_track(segments, spec: MixSpec, sample_rate: int = dsp.SAMPLE_RATE) -> np.ndarray:
    """Gain, fade and concatenate speech segments into one peak-normalized clip.

    Overshoot past the clip length is truncated; a shortfall is zero-padded.
    """
    if not segments:
        raise DataError("no speech segments to build a clean track from")
    if len(segments) != len(spec.segment_gains_db):
        raise ValueError(f"{len(segments)} segments but {len(spec.segment_gains_db)} gains")
    parts = [
        apply_fades(np.asarray(seg, dtype=np.float64) * db_to_gain(g), f, sample_rate)
        for seg, g, f in zip(segments, spec.segment_gains_db, spec.segment_fades_s)
    ]
    n = spec.clip_samples(sample_rate)
    track = np.concatenate(parts)[:n]
    if len(track) < n:
        track = np.concatenate([track, np.zeros(n - len(track))])
    return peak_normalize(track)


def fit_noise(noise, n: int, rng: np.random.Generator) -> np.ndarray:
    """Crop (at a random offset) or tile a noise recording to ``n`` samples."""
    noise = np.asarray(noise, dtype=np.float64)
    if len(noise) == 0:
        raise DataError("empty noise recording")
    if len(noise) > n:
        start = int(rng.integers(0, len(noise) - n + 1))
        return noise[start : start + n].copy()
    reps = -(-n // len(noise))
    return np.tile(noise, reps)[:n]


def build_noise_track(noise, spec: MixSpec, sample_rate: int = dsp.SAMPLE_RATE) -> np.ndarray:
    return peak_normalize(apply_fades(noise, spec.noise_fade_s, sample_rate))


def mix_at_snr(s, n, snr_db: float) -> tuple[np.ndarray, float]:
    """Return ``(s + scale * n, scale)`` with the full-clip SNR equal to ``snr_db``."""
    s = np.asarray(s, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    if s.shape != n.shape:
        raise ValueError(f"length mismatch: speech {s.shape} vs noise {n.shape}")
    e_s = float(np.dot(s, s))
    e_n = float(np.dot(n, n))
    if e_n == 0.0:
        raise ValueError("noise has zero energy")
    if e_s == 0.0:
        raise ValueError("speech has zero energy")
    scale = math.sqrt(e_s / (e_n * 10.0 ** (snr_db / 10.0)))
    return s + scale * n, scale


def measured_snr_db(s, n_scaled) -> float:
    return 10.0 * math.log10(float(np.dot(s, s)) / float(np.dot(n_scaled, n_scaled)))


# ---------------------------------------------------------------- manifests


@dataclass(frozen=True)
class DatasetManifest:
    speech_paths: tuple
    noise_paths: tuple
    split: str = "train"

    def __post_init__(self):
        if not self.speech_paths:
            raise DataError("manifest lists no speech files")
        if not self.noise_paths:
            raise DataError("manifest lists no noise files")
        if self.split not in ("train", "test"):
            raise DataError(f"split must be 'train' or 'test', got {self.split!r}")


def read_manifest(path) -> DatasetManifest:
    """Parse a manifest file.

    Format: ``[speech]`` and ``[noise]`` section headers each followed by one
    path per line, plus an optional ``[split]`` section holding ``train`` or
    ``test``. Blank lines and ``#`` comments are ignored; relative paths are
    resolved against the manifest's directory.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"{path}: cannot read manifest ({exc})") from exc
    sections: dict[str, list[str]] = {"speech": [], "noise": [], "split": []}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in sections:
                raise DataError(f"{path}:{lineno}: unknown section [{current}]")
            continue
        if current is None:
            raise DataError(f"{path}:{lineno}: entry before any section header")
        if current == "split":
            sections["split"].append(line)
        else:
            p = Path(line)
            sections[current].append(str(p if p.is_absolute() else path.parent / p))
    split = sections["split"][0] if sections["split"] else "train"
    return DatasetManifest(tuple(sections["speech"]), tuple(sections["noise"]), split)


def write_manifest(path, manifest: DatasetManifest) -> None:
    lines = ["[split]", manifest.split, "[speech]", *manifest.speech_paths]
    lines += ["[noise]", *manifest.noise_paths]
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------- synthesis


@functools.lru_cache(maxsize=512)
def _load(path: str) -> np.ndarray:
    if not Path(path).is_file():
        raise DataError(f"{path}: no such file")
    x = read_wav(path)
    x.setflags(write=False)
    return x


def load_audio(path) -> np.ndarray:
    """Read-only cached 16 kHz samples of ``path``."""
    return _load(str(path))


@dataclass
class Example:
    clean: np.ndarray
    noise: np.ndarray  # already scaled to the target SNR
    noisy: np.ndarray
    S: np.ndarray
    N: np.ndarray
    Y: np.ndarray
    spec: MixSpec
    speech_files: tuple
    noise_file: str
    noise_scale: float


def example_rng(seed: int, index: int) -> np.random.Generator:
    """PCG64 stream keyed by ``(seed, index)`` through numpy's SeedSequence."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, index])))


def noise_order(n_noise: int, seed: int) -> np.ndarray:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed]))).permutation(
        n_noise
    )


def synthesize_example(
    manifest: DatasetManifest,
    index: int,
    seed: int = 0,
    snr_db: float | None = None,
    stft_cfg: dsp.StftConfig = dsp.StftConfig(),
    sample_rate: int = dsp.SAMPLE_RATE,
) -> Example:
    """Build example ``index`` of the dataset defined by ``(manifest, seed)``.

    Noise files are visited in a seeded permutation, so none repeats until
    all have been used. ``snr_db`` pins the mixing SNR instead of drawing it.
    """
    rng = example_rng(seed, index)
    n = int(round(CLIP_SECONDS * sample_rate))
    noise_file = manifest.noise_paths[noise_order(len(manifest.noise_paths), seed)[
        index % len(manifest.noise_paths)
    ]]
    noise_raw = fit_noise(load_audio(noise_file), n, rng)

    segments, files, gains, fades = [], [], [], []
    total = 0
    while total < n:
        path = manifest.speech_paths[int(rng.integers(len(manifest.speech_paths)))]
        seg = load_audio(path)
        if len(seg) == 0:
            raise DataError(f"{path}: empty speech file")
        segments.append(seg)
        files.append(path)
        gains.append(float(rng.uniform(*GAIN_RANGE_DB)))
        fades.append(float(rng.uniform(*FADE_RANGE_S)))
        total += len(seg)
    noise_fade = float(rng.uniform(*FADE_RANGE_S))
    drawn_snr = float(rng.uniform(*SNR_RANGE_DB))
    spec = MixSpec(
        snr_db=drawn_snr if snr_db is None else float(snr_db),
        segment_gains_db=tuple(gains),
        segment_fades_s=tuple(fades),
        noise_fade_s=noise_fade,
        seed=seed,
        index=index,
    )
    clean = build_clean_track(segments, spec, sample_rate)
    noise_track = build_noise_track(noise_raw, spec, sample_rate)
    if not np.any(clean):
        raise DataError(f"example {index}: speech segments are silent")
    noisy, scale = mix_at_snr(clean, noise_track, spec.snr_db)
    noise = scale * noise_track
    return Example(
        clean=clean,
        noise=noise,
        noisy=noisy,
        S=dsp.stft(clean, stft_cfg),
        N=dsp.stft(noise, stft_cfg),
        Y=dsp.stft(noisy, stft_cfg),
        spec=spec,
        speech_files=tuple(files),
        noise_file=noise_file,
        noise_scale=scale,
    )
