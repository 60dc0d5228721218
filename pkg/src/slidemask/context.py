"""Sliding time-context windows and multi-context mask averaging.

A context window of ``w`` bins slides over the ``T`` frames of a spectrogram
one bin at a time, giving ``K = T - w + 1`` windows; window ``k`` (0-based)
covers frames ``k .. k + w - 1``. A model emits a mask estimate for every
frame of every window, and the final mask for frame ``t`` is the plain mean
over all windows that contain it. Near the edges fewer windows cover a
frame: ``t + 1`` at the start, ``T - t`` at the end (0-based ``t``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputTooShortError, ShapeError


@dataclass(frozen=True)
class ContextWindowConfig:
    w_in: int = 1
    w_out: int = 1

    def __post_init__(self):
        if self.w_in < 1:
            raise ValueError(f"w_in must be >= 1, got {self.w_in}")
        if self.w_out not in (1, self.w_in):
            raise ValueError(f"w_out must be 1 or w_in={self.w_in}, got {self.w_out}")

    @property
    def sliding(self) -> bool:
        return self.w_out > 1


def n_windows(T: int, w: int) -> int:
    return T - w + 1


def frame_windows(Ybar, w: int) -> np.ndarray:
    """Stack the ``K = T - w + 1`` context windows of a ``(T, F)`` grid.

    Returns an array of shape ``(K, w, F)``; entry ``[k, j]`` is frame ``k + j``.
    """
    Ybar = np.asarray(Ybar)
    if Ybar.ndim != 2:
        raise ShapeError(f"expected a (T, F) grid, got shape {Ybar.shape}")
    if w < 1:
        raise ValueError(f"window length must be >= 1, got {w}")
    T = Ybar.shape[0]
    if T < w:
        raise InputTooShortError(f"sequence shorter than window: T={T} < w={w}")
    view = np.lib.stride_tricks.sliding_window_view(Ybar, w, axis=0)  # (K, F, w)
    return np.ascontiguousarray(view.transpose(0, 2, 1))


def coverage_counts(T: int, w: int) -> np.ndarray:
    """Number of windows containing each frame, shape ``(T,)``."""
    t = np.arange(T)
    first = np.maximum(0, t - w + 1)
    last = np.minimum(t, T - w)
    return last - first + 1


def combine(estimates, T: int, w: int) -> np.ndarray:
    """Average overlapping per-window estimates back onto the frame axis.

    ``estimates`` has shape ``(K, w, F)`` with ``K = T - w + 1``. Windows are
    accumulated in ascending order and each frame is divided once by its
    coverage count, so the result is deterministic.
    """
    est = np.asarray(estimates, dtype=np.float64)
    if est.ndim != 3 or est.shape[1] != w:
        raise ShapeError(f"estimates must have shape (K, {w}, F), got {est.shape}")
    K = n_windows(T, w)
    if K < 1:
        raise InputTooShortError(f"sequence shorter than window: T={T} < w={w}")
    if est.shape[0] != K:
        raise ShapeError(f"expected K = T - w + 1 = {K} windows, got {est.shape[0]}")
    acc = np.zeros((T, est.shape[2]))
    for k in range(K):
        acc[k : k + w] += est[k]
    return acc / coverage_counts(T, w)[:, None]


def latency(w: int, t_hop: float) -> float:
    """Extra algorithmic delay in seconds of a ``w``-bin context window."""
    if w < 1:
        raise ValueError(f"window length must be >= 1, got {w}")
    if t_hop <= 0:
        raise ValueError(f"hop duration must be positive, got {t_hop}")
    return (w - 1) * t_hop


def last_bin_sequence(last_estimates, w: int) -> np.ndarray:
    """Assemble a ``(T, F)`` mask from per-window estimates of the newest bin.

    ``last_estimates[k]`` is the estimate for frame ``k + w - 1``. The first
    ``w - 1`` frames have no estimate of their own and reuse window 0's.
    """
    last = np.asarray(last_estimates, dtype=np.float64)
    head = np.repeat(last[:1], w - 1, axis=0)
    return np.concatenate([head, last], axis=0)


def run_sliding_inference(model, Ybar, cfg: ContextWindowConfig) -> np.ndarray:
    """Estimate a ``(T, F)`` mask for a normalized noisy magnitude grid.

    ``model`` is any object whose ``predict(windows)`` maps a ``(K, w_in, F)``
    stack of context windows to ``(K, w_out, F)`` estimates in [0, 1] (see
    :class:`slidemask.nn.model.MaskEstimator`). With ``w_out == w_in`` every
    frame is the mean over all windows covering it; with ``w_out == 1`` each
    window only contributes its newest frame.
    """
    Ybar = np.asarray(Ybar, dtype=np.float64)
    T = Ybar.shape[0] if Ybar.ndim == 2 else 0
    windows = frame_windows(Ybar, cfg.w_in)
    est = np.asarray(model.predict(windows), dtype=np.float64)
    expected = (windows.shape[0], cfg.w_out, Ybar.shape[1])
    if est.shape != expected:
        raise ShapeError(f"model returned shape {est.shape}, expected {expected}")
    if cfg.w_out == 1:
        return last_bin_sequence(est[:, 0], cfg.w_in)
    return combine(est, T, cfg.w_in)
