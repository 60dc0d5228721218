"""Mini-batch training of mask estimators on the compressed magnitude loss."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .. import dsp
from ..context import frame_windows
from ..errors import DataError, NumericalError
from ..masking import LOSS_EXPONENT, compressed_mse
from .model import MaskEstimator
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 5e-4
    batch_size: int = 32
    epochs: int = 50
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    chunk_frames: int = 100  # window positions per training sequence

    def __post_init__(self):
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.chunk_frames < 1:
            raise ValueError("chunk_frames must be >= 1")


@dataclass
class TrainingExample:
    """Per-utterance features: normalized noisy input and the two magnitudes."""

    noisy_norm: np.ndarray
    noisy_mag: np.ndarray
    clean_mag: np.ndarray
    stats: dsp.NormalizationStats | None = None


def prepare_example(clean, noisy, stft_cfg=dsp.StftConfig()) -> TrainingExample:
    Y = dsp.stft(noisy, stft_cfg)
    S = dsp.stft(clean, stft_cfg)
    y_mag = dsp.magnitude(Y)
    y_norm, stats = dsp.normalize(y_mag)
    return TrainingExample(y_norm, y_mag, dsp.magnitude(S), stats)


@dataclass
class TrainLog:
    epoch_losses: list = field(default_factory=list)
    steps: int = 0


def make_batch(examples, chunks, w_in: int, w_out: int, length: int):
    """Gather model inputs and loss targets for a list of ``(example, k0)`` chunks.

    Returns ``x`` of shape ``(B, w_in, F, L)`` and noisy/clean magnitudes of
    shape ``(B, L, w_out, F)`` aligned with the model output frames: every
    frame of each window when ``w_out == w_in``, only the newest otherwise.
    """
    xs, ys, ss = [], [], []
    for ei, k0 in chunks:
        ex = examples[ei]
        sl = slice(k0, k0 + length + w_in - 1)
        xs.append(frame_windows(ex.noisy_norm[sl], w_in))
        if w_out == w_in:
            ys.append(frame_windows(ex.noisy_mag[sl], w_in))
            ss.append(frame_windows(ex.clean_mag[sl], w_in))
        else:
            last = slice(k0 + w_in - 1, k0 + w_in - 1 + length)
            ys.append(ex.noisy_mag[last][:, None])
            ss.append(ex.clean_mag[last][:, None])
    x = np.stack(xs).transpose(0, 2, 3, 1)
    return x, np.stack(ys), np.stack(ss)


def enumerate_chunks(examples, w_in: int, chunk_frames: int):
    """Split every example's window positions into equal-length chunks.

    An example with fewer than ``chunk_frames`` windows yields one shorter
    chunk; longer examples drop the remainder.
    """
    chunks = []
    for ei, ex in enumerate(examples):
        K = ex.noisy_norm.shape[0] - w_in + 1
        if K < 1:
            raise DataError(f"example {ei} has {ex.noisy_norm.shape[0]} frames < w_in={w_in}")
        L = min(chunk_frames, K)
        for k0 in range(0, K - L + 1, L):
            chunks.append((ei, k0, L))
    return chunks


def batch_loss(model: MaskEstimator, x, y_mag, s_mag, scale: float, c: float = LOSS_EXPONENT):
    """Forward + loss + backward for one batch.

    Returns per-chunk losses (before ``scale``) and parameter gradients of
    ``scale * sum(losses)``.
    """
    mask = model.forward(x).transpose(0, 3, 1, 2)  # (B, L, w_out, F)
    s_hat = mask * y_mag
    report = compressed_mse(s_hat, s_mag, c)
    diff = s_hat**c - s_mag**c
    per_chunk = np.sum(diff * diff, axis=(1, 2, 3))
    dmask = scale * report.gradient * y_mag
    grads = model.backward(dmask.transpose(0, 2, 3, 1))
    return per_chunk, grads


def train(model: MaskEstimator, dataset, cfg: TrainConfig, callback=None) -> TrainLog:
    """Train ``model`` in place with Adam.

    Each epoch visits every chunk once in a seeded random order. The loss
    for a batch is the summed compressed-MSE over all output frames, divided
    by the batch size; the logged epoch loss is the mean per-chunk loss.
    """
    if not dataset:
        raise DataError("training set is empty")
    ctx = model.config.context
    chunks = enumerate_chunks(dataset, ctx.w_in, cfg.chunk_frames)
    rng = np.random.default_rng(cfg.seed)
    params = [arr for _, arr in model.parameters()]
    state = AdamState()
    history = TrainLog()
    for epoch in range(cfg.epochs):
        order = rng.permutation(len(chunks))
        losses = np.empty(len(chunks))
        for b0 in range(0, len(order), cfg.batch_size):
            idx = order[b0 : b0 + cfg.batch_size]
            scale = 1.0 / len(idx)
            groups: dict[int, list] = {}
            for i in idx:
                groups.setdefault(chunks[i][2], []).append(i)
            total = None
            for length, members in groups.items():
                picks = [(chunks[i][0], chunks[i][1]) for i in members]
                x, y_mag, s_mag = make_batch(dataset, picks, ctx.w_in, ctx.w_out, length)
                per_chunk, grads = batch_loss(model, x, y_mag, s_mag, scale)
                losses[members] = per_chunk
                grads = [g.copy() for g in grads]
                total = grads if total is None else [a + g for a, g in zip(total, grads)]
            if not all(np.all(np.isfinite(g)) for g in total) or not np.all(
                np.isfinite(losses[idx])
            ):
                raise NumericalError(
                    f"non-finite loss or gradient at epoch {epoch + 1}, step {history.steps + 1}"
                )
            adam_step(
                params, total, state, cfg.learning_rate, (cfg.beta1, cfg.beta2), cfg.eps
            )
            history.steps += 1
        epoch_loss = math.fsum(losses) / len(losses)
        history.epoch_losses.append(epoch_loss)
        log.info("epoch %d/%d loss %.6f", epoch + 1, cfg.epochs, epoch_loss)
        if callback is not None:
            callback(epoch, epoch_loss)
    return history


def evaluate_loss(model: MaskEstimator, dataset, chunk_frames: int = 100) -> float:
    """Mean per-chunk loss without updating the model."""
    ctx = model.config.context
    chunks = enumerate_chunks(dataset, ctx.w_in, chunk_frames)
    losses = []
    for ei, k0, L in chunks:
        x, y_mag, s_mag = make_batch(dataset, [(ei, k0)], ctx.w_in, ctx.w_out, L)
        mask = model.forward(x).transpose(0, 3, 1, 2)
        losses.append(compressed_mse(mask * y_mag, s_mag).loss)
    return math.fsum(losses) / len(losses)
