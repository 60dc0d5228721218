"""Denoising a waveform with a trained (or stub) mask estimator."""
from __future__ import annotations

from types import SimpleNamespace

import numpy as np

from . import dsp
from .context import ContextWindowConfig, run_sliding_inference
from .masking import apply_mask, ideal_ratio_mask


class NewestFrameOnly:
    """Run a ``w_out == w_in`` model in ``w_out == 1`` mode."""

    def __init__(self, model):
        self.model = model

    def predict(self, windows):
        return self.model.predict(windows)[:, -1:]


def estimate_mask(model, noisy, cfg: ContextWindowConfig | None = None,
                  stft_cfg: dsp.StftConfig = dsp.StftConfig()):
    """Return ``(mask, Y)`` for a noisy waveform; ``mask`` is ``(T, F)`` in [0, 1]."""
    if cfg is None:
        cfg = model.config.context
    native = getattr(getattr(model, "config", None), "context", cfg)
    if cfg.w_out == 1 and native.w_out > 1:
        model = NewestFrameOnly(model)
    Y = dsp.stft(noisy, stft_cfg)
    y_norm, _ = dsp.normalize(dsp.magnitude(Y))
    return run_sliding_inference(model, y_norm, cfg), Y


def denoise(model, noisy, cfg: ContextWindowConfig | None = None,
            stft_cfg: dsp.StftConfig = dsp.StftConfig()) -> np.ndarray:
    """Mask the noisy STFT (keeping its phase) and resynthesize at the input length."""
    noisy = dsp.as_waveform(noisy)
    mask, Y = estimate_mask(model, noisy, cfg, stft_cfg)
    return dsp.istft(apply_mask(mask, Y), stft_cfg, length=len(noisy))


def oracle_denoise(clean, noisy, beta: float = 1.0,
                   stft_cfg: dsp.StftConfig = dsp.StftConfig()) -> np.ndarray:
    """Apply the ideal ratio mask computed from the true clean/noise split."""
    clean = dsp.as_waveform(clean)
    noisy = dsp.as_waveform(noisy)
    S = dsp.stft(clean, stft_cfg)
    Y = dsp.stft(noisy, stft_cfg)
    mask = ideal_ratio_mask(S, Y - S, beta)
    return dsp.istft(apply_mask(mask, Y), stft_cfg, length=len(noisy))


class ConstantMask:
    """Stub estimator that emits the same gain everywhere."""

    def __init__(self, value: float, context: ContextWindowConfig = ContextWindowConfig()):
        self.value = float(value)
        self.config = SimpleNamespace(context=context)

    def predict(self, windows):
        K, _, F = np.shape(windows)
        return np.full((K, self.config.context.w_out, F), self.value)
