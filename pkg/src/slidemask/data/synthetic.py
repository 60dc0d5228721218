"""Speech-like and noise signals for desk-scale experiments.

The "speech" is a sequence of syllables: harmonic tones with a gliding
pitch, shaped by three random formant resonances, plus occasional
fricative-like noise bursts, separated by short pauses. It is not speech,
but it has the sparse, harmonic, time-varying structure that makes
time-frequency masking useful.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .. import dsp
from ..audio import write_wav
from .pipeline import DatasetManifest, peak_normalize, write_manifest

NOISE_KINDS = ("white", "pink", "brown", "hum", "modulated", "tonal")


def _formant_gain(freqs, formants, bandwidths):
    g = np.zeros_like(freqs)
    for fc, bw in zip(formants, bandwidths):
        g += np.exp(-0.5 * ((freqs - fc) / bw) ** 2)
    return (g + 0.05) / (1.0 + freqs / 500.0)


def _syllable(n, rng, fs):
    t = np.arange(n)
    env = np.sin(np.pi * (t + 0.5) / n) ** 2
    if rng.random() < 0.8:
        f0 = rng.uniform(95.0, 230.0)
        glide = rng.uniform(-0.25, 0.25)
        f0_t = f0 * (1.0 + glide * t / n)
        phase = 2.0 * np.pi * np.cumsum(f0_t) / fs
        formants = (rng.uniform(300, 900), rng.uniform(900, 2300), rng.uniform(2400, 3500))
        bws = (rng.uniform(60, 150), rng.uniform(80, 200), rng.uniform(100, 250))
        n_harm = int(3800.0 // (f0 * (1 + max(glide, 0.0))))
        out = np.zeros(n)
        for h in range(1, n_harm + 1):
            amp = _formant_gain(np.array([h * f0]), formants, bws)[0]
            out += amp * np.sin(h * phase + rng.uniform(0, 2 * np.pi))
    else:
        white = rng.standard_normal(n)
        spec = np.fft.rfft(white)
        freqs = np.fft.rfftfreq(n, 1.0 / fs)
        lo = rng.uniform(2000, 4000)
        spec *= 1.0 / (1.0 + np.exp(-(freqs - lo) / 300.0))
        out = 0.3 * np.fft.irfft(spec, n)
    return env * out


def speech_like(duration_s: float, rng: np.random.Generator, sample_rate: int = dsp.SAMPLE_RATE):
    """Peak-normalized speech-like signal of the given duration."""
    n = int(round(duration_s * sample_rate))
    out = np.zeros(n)
    pos = int(rng.uniform(0.02, 0.1) * sample_rate)
    while pos < n:
        length = int(rng.uniform(0.12, 0.35) * sample_rate)
        seg = _syllable(length, rng, sample_rate) * rng.uniform(0.4, 1.0)
        end = min(n, pos + length)
        out[pos:end] += seg[: end - pos]
        pos = end + int(rng.uniform(0.03, 0.25) * sample_rate)
    return peak_normalize(out)


def _shaped_noise(n, rng, exponent):
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.arange(spec.size, dtype=np.float64)
    f[0] = 1.0
    spec *= f ** (-exponent / 2.0)
    return np.fft.irfft(spec, n)


def noise_like(
    kind: str, duration_s: float, rng: np.random.Generator, sample_rate: int = dsp.SAMPLE_RATE
):
    """Peak-normalized noise of one of :data:`NOISE_KINDS`."""
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    if kind == "white":
        x = rng.standard_normal(n)
    elif kind == "pink":
        x = _shaped_noise(n, rng, 1.0)
    elif kind == "brown":
        x = _shaped_noise(n, rng, 2.0)
    elif kind == "hum":
        base = rng.choice([50.0, 60.0])
        x = sum(np.sin(2 * np.pi * base * h * t + rng.uniform(0, 6.3)) / h for h in range(1, 12))
        pn = _shaped_noise(n, rng, 1.0)
        x = x / np.std(x) + 0.3 * pn / np.std(pn)
    elif kind == "modulated":
        rate = rng.uniform(1.0, 6.0)
        x = _shaped_noise(n, rng, 0.7) * (1.2 + np.sin(2 * np.pi * rate * t))
    elif kind == "tonal":
        x = 0.5 * rng.standard_normal(n) / 3.0
        for _ in range(int(rng.integers(2, 6))):
            x = x + rng.uniform(0.2, 1.0) * np.sin(
                2 * np.pi * rng.uniform(200, 6000) * t + rng.uniform(0, 6.3)
            )
    else:
        raise ValueError(f"unknown noise kind {kind!r}; choose from {NOISE_KINDS}")
    return peak_normalize(x)


def write_desk_corpus(
    out_dir,
    n_speech: int = 40,
    n_noise: int = 24,
    seed: int = 0,
    speech_s=(2.0, 5.0),
    noise_s: float = 12.0,
    split: str = "train",
    sample_rate: int = dsp.SAMPLE_RATE,
) -> Path:
    """Write synthetic speech/noise WAVs and a manifest; return the manifest path."""
    out_dir = Path(out_dir)
    (out_dir / "speech").mkdir(parents=True, exist_ok=True)
    (out_dir / "noise").mkdir(parents=True, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0xC0FFEE])))
    speech, noise = [], []
    for i in range(n_speech):
        p = out_dir / "speech" / f"speech_{i:04d}.wav"
        write_wav(p, 0.9 * speech_like(rng.uniform(*speech_s), rng, sample_rate), sample_rate)
        speech.append(str(p.relative_to(out_dir)))
    for i in range(n_noise):
        kind = NOISE_KINDS[i % len(NOISE_KINDS)]
        p = out_dir / "noise" / f"noise_{i:04d}_{kind}.wav"
        write_wav(p, 0.9 * noise_like(kind, noise_s, rng, sample_rate), sample_rate)
        noise.append(str(p.relative_to(out_dir)))
    manifest_path = out_dir / "manifest.txt"
    write_manifest(manifest_path, DatasetManifest(tuple(speech), tuple(noise), split))
    return manifest_path
