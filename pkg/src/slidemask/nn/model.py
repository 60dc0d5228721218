"""CDAE / CRN mask estimators built from layer descriptions."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ..context import ContextWindowConfig
from ..errors import ShapeError
from .layers import LSTM, Dense, FreqConv, FreqConvTranspose, ReLU, Sigmoid

CONV = "conv2d-freq"
CONV_T = "conv2d-transposed-freq"
RELU = "relu"
SIGMOID = "sigmoid"
LAYER_KINDS = (CONV, CONV_T, RELU, SIGMOID, "lstm", "fully-connected")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    feature_maps: int | None = None
    kernel: int | None = None
    stride: int = 1
    padding: int = 0
    output_padding: int = 0

    def __post_init__(self):
        if self.kind not in (CONV, CONV_T, RELU, SIGMOID):
            raise ValueError(f"unsupported layer kind in conv stack: {self.kind!r}")
        if self.kind in (CONV, CONV_T):
            if not self.feature_maps or self.feature_maps < 1:
                raise ValueError("convolution needs feature_maps >= 1")
            if not self.kernel or self.kernel < 1:
                raise ValueError("convolution needs kernel >= 1")
            if self.stride < 1:
                raise ValueError("convolution needs stride >= 1")


def conv(c_f, c_k=3, c_s=2, padding=1):
    return LayerSpec(CONV, c_f, c_k, c_s, padding)


def conv_t(c_f, c_k=3, c_s=2, padding=1, output_padding=0):
    return LayerSpec(CONV_T, c_f, c_k, c_s, padding, output_padding)


@dataclass(frozen=True)
class ModelConfig:
    architecture: str
    encoder: tuple
    decoder: tuple
    context: ContextWindowConfig = field(default_factory=ContextWindowConfig)
    lstm_units: int | None = None
    n_freq: int = 65

    def __post_init__(self):
        if self.architecture not in ("cdae", "crn"):
            raise ValueError(f"architecture must be 'cdae' or 'crn', got {self.architecture!r}")
        if (self.architecture == "crn") != (self.lstm_units is not None):
            raise ValueError("an LSTM bottleneck is required for CRN and forbidden for CDAE")
        shapes = layer_shapes(self)
        f_out, c_out = shapes[-1]
        if f_out != self.n_freq:
            raise ValueError(f"decoder yields {f_out} frequency bins, expected {self.n_freq}")
        if c_out != self.context.w_out:
            raise ValueError(f"decoder yields {c_out} channels, expected w_out={self.context.w_out}")
        if not self.decoder or self.decoder[-1].kind != SIGMOID:
            raise ValueError("the decoder must end in a sigmoid")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["encoder"] = [asdict(s) for s in self.encoder]
        d["decoder"] = [asdict(s) for s in self.decoder]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            architecture=d["architecture"],
            encoder=tuple(LayerSpec(**s) for s in d["encoder"]),
            decoder=tuple(LayerSpec(**s) for s in d["decoder"]),
            context=ContextWindowConfig(**d["context"]),
            lstm_units=d["lstm_units"],
            n_freq=d["n_freq"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def bottleneck_size(self) -> int:
        f, c = layer_shapes(self)[len(self.encoder)]
        return f * c


def _conv_out(spec: LayerSpec, f: int) -> int:
    if spec.kind == CONV:
        return (f + 2 * spec.padding - spec.kernel) // spec.stride + 1
    return (f - 1) * spec.stride - 2 * spec.padding + spec.kernel + spec.output_padding


def layer_shapes(cfg: ModelConfig) -> list[tuple[int, int]]:
    """(freq, channels) after the input and after every conv-stack layer."""
    f, c = cfg.n_freq, cfg.context.w_in
    shapes = [(f, c)]
    for spec in (*cfg.encoder, *cfg.decoder):
        if spec.kind in (CONV, CONV_T):
            f, c = _conv_out(spec, f), spec.feature_maps
            if f < 1:
                raise ValueError(f"frequency extent collapses to {f} at {spec}")
        shapes.append((f, c))
    return shapes


def count_params(cfg: ModelConfig) -> int:
    """Closed-form number of trainable scalars for ``cfg``."""
    total = 0
    c = cfg.context.w_in
    for spec in (*cfg.encoder, *cfg.decoder):
        if spec.kind in (CONV, CONV_T):
            total += spec.kernel * c * spec.feature_maps + spec.feature_maps
            c = spec.feature_maps
    if cfg.lstm_units:
        d, h = cfg.bottleneck_size, cfg.lstm_units
        total += 4 * h * (d + h + 1)  # LSTM
        total += h * d + d  # FC back to the decoder input size
    return total


def param_increase_pct(cfg: ModelConfig, baseline: ModelConfig) -> float:
    return 100.0 * (count_params(cfg) - count_params(baseline)) / count_params(baseline)


def reference_config(architecture="cdae", w_in=1, w_out=1, n_freq=65) -> ModelConfig:
    """Desk-scale reference architecture.

    Three stride-2 frequency convolutions (8, 64, 96 feature maps, kernel 3)
    and a mirrored transposed decoder; 65 bins shrink to 9 and are restored.
    The CRN variant adds LSTM(64) + FC between encoder and decoder. Only the
    first and last layers depend on the context sizes.
    """
    encoder = (conv(8), LayerSpec(RELU), conv(64), LayerSpec(RELU), conv(96), LayerSpec(RELU))
    decoder = (
        conv_t(64),
        LayerSpec(RELU),
        conv_t(8),
        LayerSpec(RELU),
        conv_t(w_out),
        LayerSpec(SIGMOID),
    )
    return ModelConfig(
        architecture=architecture,
        encoder=encoder,
        decoder=decoder,
        context=ContextWindowConfig(w_in, w_out),
        lstm_units=64 if architecture == "crn" else None,
        n_freq=n_freq,
    )


def _build(spec: LayerSpec, c_in: int, rng):
    if spec.kind == CONV:
        return FreqConv(c_in, spec.feature_maps, spec.kernel, spec.stride, spec.padding, rng=rng)
    if spec.kind == CONV_T:
        return FreqConvTranspose(
            c_in, spec.feature_maps, spec.kernel, spec.stride, spec.padding,
            spec.output_padding, rng=rng,
        )
    return ReLU() if spec.kind == RELU else Sigmoid()


class MaskEstimator:
    """Trainable mask network.

    ``forward`` maps ``(B, w_in, F, T)`` (or unbatched ``(w_in, F, T)``) to
    masks of shape ``(B, w_out, F, T)`` in [0, 1]. Channels hold the frames
    of a context window, ``T`` indexes window positions. Convolutions act on
    each time step independently; only the CRN's LSTM mixes time steps, and
    it is causal.
    """

    def __init__(self, config: ModelConfig, seed: int = 0):
        self.config = config
        rng = np.random.default_rng(seed)
        c = config.context.w_in
        self.encoder, self.decoder = [], []
        for spec in config.encoder:
            self.encoder.append(_build(spec, c, rng))
            c = spec.feature_maps or c
        self.bottleneck = []
        if config.lstm_units:
            d = config.bottleneck_size
            self.bottleneck = [
                LSTM(d, config.lstm_units, rng=rng),
                Dense(config.lstm_units, d, rng=rng),
                ReLU(),
            ]
        for spec in config.decoder:
            self.decoder.append(_build(spec, c, rng))
            c = spec.feature_maps or c

    @property
    def layers(self):
        return [*self.encoder, *self.bottleneck, *self.decoder]

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """Named parameter arrays in declaration order (these are live references)."""
        out = []
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params.items():
                out.append((f"{i}.{type(layer).__name__}.{name}", arr))
        return out

    def gradients(self) -> list[np.ndarray]:
        return [layer.grads[name] for layer in self.layers for name in layer.params]

    @property
    def n_params(self) -> int:
        return sum(arr.size for _, arr in self.parameters())

    def get_flat(self) -> np.ndarray:
        return np.concatenate([arr.ravel() for _, arr in self.parameters()])

    def set_flat(self, flat) -> None:
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != self.n_params:
            raise ShapeError(f"expected {self.n_params} parameters, got {flat.size}")
        pos = 0
        for _, arr in self.parameters():
            arr[...] = flat[pos : pos + arr.size].reshape(arr.shape)
            pos += arr.size

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 3
        if squeeze:
            x = x[None]
        cfg = self.config
        if x.ndim != 4 or x.shape[1] != cfg.context.w_in or x.shape[2] != cfg.n_freq:
            raise ShapeError(
                f"expected input (B, {cfg.context.w_in}, {cfg.n_freq}, T), got {x.shape}"
            )
        B, C, F, T = x.shape
        h = x.transpose(0, 3, 2, 1).reshape(B * T, F, C)
        for layer in self.encoder:
            h = layer.forward(h)
        if self.bottleneck:
            enc_shape = h.shape
            h = h.reshape(B, T, -1)
            for layer in self.bottleneck:
                h = layer.forward(h)
            h = h.reshape(enc_shape)
        for layer in self.decoder:
            h = layer.forward(h)
        self._bt = (B, T)
        out = h.reshape(B, T, F, -1).transpose(0, 3, 2, 1)
        return out[0] if squeeze else out

    def backward(self, dout) -> list[np.ndarray]:
        """Backpropagate ``dL/d(output)`` from the last ``forward`` call.

        Returns parameter gradients in the order of :meth:`parameters`.
        """
        dout = np.asarray(dout, dtype=np.float64)
        if dout.ndim == 3:
            dout = dout[None]
        B, T = self._bt
        C, F = dout.shape[1], dout.shape[2]
        g = dout.transpose(0, 3, 2, 1).reshape(B * T, F, C)
        for layer in reversed(self.decoder):
            g = layer.backward(g)
        if self.bottleneck:
            enc_shape = g.shape
            g = g.reshape(B, T, -1)
            for layer in reversed(self.bottleneck):
                g = layer.backward(g)
            g = g.reshape(enc_shape)
        for layer in reversed(self.encoder):
            g = layer.backward(g)
        self.input_grad = g.reshape(B, T, F, -1).transpose(0, 3, 2, 1)
        return self.gradients()

    def predict(self, windows) -> np.ndarray:
        """``(K, w_in, F)`` context windows -> ``(K, w_out, F)`` mask estimates."""
        windows = np.asarray(windows, dtype=np.float64)
        out = self.forward(windows.transpose(1, 2, 0))
        return out.transpose(2, 0, 1)
