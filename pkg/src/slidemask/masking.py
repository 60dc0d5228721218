"""Ideal ratio masks, mask application and the compressed magnitude loss."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

DEFAULT_BETA = 0.5
LOSS_EXPONENT = 0.3
_SILENT_POWER = 1e-12
_GRAD_FLOOR = 1e-8


def _check_same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what}: shape mismatch {a.shape} vs {b.shape}")


def _check_beta(beta: float) -> None:
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"compression beta must lie in (0, 1], got {beta}")


def ideal_ratio_mask(S, N, beta: float = DEFAULT_BETA) -> np.ndarray:
    """``(|S|^2 / (|S|^2 + |N|^2)) ** beta``; bins with no energy get 0."""
    _check_beta(beta)
    S = np.asarray(S)
    N = np.asarray(N)
    _check_same_shape(S, N, "ideal_ratio_mask")
    ps = np.abs(S) ** 2
    pn = np.abs(N) ** 2
    total = ps + pn
    silent = total < _SILENT_POWER
    ratio = np.divide(ps, total, out=np.zeros_like(ps), where=~silent)
    return np.clip(ratio, 0.0, 1.0) ** beta


def apply_mask(mask, Y) -> np.ndarray:
    """Scale each complex bin of ``Y`` by a real gain; the phase is untouched."""
    mask = np.asarray(mask, dtype=np.float64)
    Y = np.asarray(Y)
    _check_same_shape(mask, Y, "apply_mask")
    return mask * Y


@dataclass
class LossReport:
    loss: float
    gradient: np.ndarray


def compressed_mse(S_hat_mag, S_mag, c: float = LOSS_EXPONENT) -> LossReport:
    """Summed squared error between power-compressed magnitudes.

    Works on grids of any rank, so the windowed form (an extra leading
    context axis) is the same call. The gradient is taken w.r.t.
    ``S_hat_mag``; near zero the estimate is floored at 1e-8 to keep
    ``c * x**(c - 1)`` bounded. The loss value itself is not floored.
    """
    S_hat_mag = np.asarray(S_hat_mag, dtype=np.float64)
    S_mag = np.asarray(S_mag, dtype=np.float64)
    _check_same_shape(S_hat_mag, S_mag, "compressed_mse")
    if (S_hat_mag < 0).any() or (S_mag < 0).any():
        raise ValueError("compressed_mse needs non-negative magnitudes")
    diff = S_hat_mag**c - S_mag**c
    loss = float(np.sum(diff * diff))
    grad = 2.0 * diff * c * np.maximum(S_hat_mag, _GRAD_FLOOR) ** (c - 1.0)
    return LossReport(loss, grad)
