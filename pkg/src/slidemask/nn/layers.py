"""Layers with hand-written backward passes.

Activations are channel-last. Convolutions see ``(N, F, C)`` arrays and
slide along the frequency axis only; the recurrent and dense layers see
``(B, T, D)``. Every layer caches what its backward pass needs during
``forward`` and writes parameter gradients into ``self.grads`` (overwriting,
not accumulating) during ``backward``.
"""
from __future__ import annotations

import numpy as np


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _sigmoid(x):
    # tanh form saturates to exactly 0 / 1 instead of overflowing
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class Layer:
    trainable = False

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dy):
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params.values())


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


class Sigmoid(Layer):
    def forward(self, x):
        self._y = _sigmoid(x)
        return self._y

    def backward(self, dy):
        return dy * self._y * (1.0 - self._y)


class FreqConv(Layer):
    """Strided 1-D convolution over frequency, shared across time steps.

    Weight shape is ``(kernel, c_in, c_out)``.
    """

    trainable = True

    def __init__(self, c_in, c_out, kernel, stride=1, padding=0, rng=None):
        super().__init__()
        self.c_in, self.c_out = c_in, c_out
        self.kernel, self.stride, self.padding = kernel, stride, padding
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params["W"] = glorot_uniform(
            rng, (kernel, c_in, c_out), c_in * kernel, c_out * kernel
        )
        self.params["b"] = np.zeros(c_out)

    def out_len(self, f_in: int) -> int:
        return (f_in + 2 * self.padding - self.kernel) // self.stride + 1

    def _taps(self, f_in, f_out):
        # (tap, first output, last output + 1, first input) for in-range reads
        k, s, p = self.kernel, self.stride, self.padding
        taps = []
        for j in range(k):
            lo = max(0, -((j - p) // s))
            hi = min(f_out - 1, (f_in - 1 + p - j) // s)
            if hi >= lo:
                taps.append((j, lo, hi + 1, j + s * lo - p))
        return taps

    def forward(self, x):
        n, f_in, _ = x.shape
        k, s = self.kernel, self.stride
        f_out = self.out_len(f_in)
        cols = np.zeros((n, f_out, k, self.c_in))
        for j, lo, hi, start in self._taps(f_in, f_out):
            cols[:, lo:hi, j] = x[:, start : start + s * (hi - lo - 1) + 1 : s]
        cols = cols.reshape(n * f_out, k * self.c_in)
        self._cache = (cols, x.shape, f_out)
        y = cols @ self.params["W"].reshape(k * self.c_in, self.c_out)
        y += self.params["b"]
        return y.reshape(n, f_out, self.c_out)

    def backward(self, dy):
        cols, (n, f_in, _), f_out = self._cache
        k, s = self.kernel, self.stride
        dy2 = dy.reshape(n * f_out, self.c_out)
        W2 = self.params["W"].reshape(k * self.c_in, self.c_out)
        self.grads["W"] = (cols.T @ dy2).reshape(self.params["W"].shape)
        self.grads["b"] = dy2.sum(axis=0)
        dcols = (dy2 @ W2.T).reshape(n, f_out, k, self.c_in)
        dx = np.zeros((n, f_in, self.c_in))
        for j, lo, hi, start in self._taps(f_in, f_out):
            dx[:, start : start + s * (hi - lo - 1) + 1 : s] += dcols[:, lo:hi, j]
        return dx


class FreqConvTranspose(Layer):
    """Adjoint of :class:`FreqConv`; upsamples the frequency axis.

    Output length is ``(f_in - 1) * stride - 2 * padding + kernel + output_padding``.
    """

    trainable = True

    def __init__(self, c_in, c_out, kernel, stride=1, padding=0, output_padding=0, rng=None):
        super().__init__()
        self.c_in, self.c_out = c_in, c_out
        self.kernel, self.stride = kernel, stride
        self.padding, self.output_padding = padding, output_padding
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params["W"] = glorot_uniform(
            rng, (kernel, c_in, c_out), c_in * kernel, c_out * kernel
        )
        self.params["b"] = np.zeros(c_out)

    def out_len(self, f_in: int) -> int:
        return (f_in - 1) * self.stride - 2 * self.padding + self.kernel + self.output_padding

    def _wmat(self):
        # (c_in, kernel * c_out)
        return self.params["W"].transpose(1, 0, 2).reshape(self.c_in, -1)

    def forward(self, x):
        n, f_in, _ = x.shape
        k, s, p = self.kernel, self.stride, self.padding
        f_out = self.out_len(f_in)
        full = (f_in - 1) * s + k + self.output_padding
        x2 = x.reshape(n * f_in, self.c_in)
        z = (x2 @ self._wmat()).reshape(n, f_in, k, self.c_out)
        yfull = np.zeros((n, full, self.c_out))
        span = s * (f_in - 1) + 1
        for j in range(k):
            yfull[:, j : j + span : s] += z[:, :, j]
        self._cache = (x2, x.shape, f_out, full)
        return yfull[:, p : p + f_out] + self.params["b"]

    def backward(self, dy):
        x2, (n, f_in, _), f_out, full = self._cache
        k, s, p = self.kernel, self.stride, self.padding
        self.grads["b"] = dy.sum(axis=(0, 1))
        dyfull = np.zeros((n, full, self.c_out))
        dyfull[:, p : p + f_out] = dy
        span = s * (f_in - 1) + 1
        dz = np.stack([dyfull[:, j : j + span : s] for j in range(k)], axis=2)
        dz = dz.reshape(n * f_in, k * self.c_out)
        dw = (x2.T @ dz).reshape(self.c_in, k, self.c_out)
        self.grads["W"] = dw.transpose(1, 0, 2)
        return (dz @ self._wmat().T).reshape(n, f_in, self.c_in)


class Dense(Layer):
    trainable = True

    def __init__(self, d_in, d_out, rng=None):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params["W"] = glorot_uniform(rng, (d_in, d_out), d_in, d_out)
        self.params["b"] = np.zeros(d_out)

    def forward(self, x):
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        x2 = self._x.reshape(-1, self._x.shape[-1])
        dy2 = dy.reshape(-1, dy.shape[-1])
        self.grads["W"] = x2.T @ dy2
        self.grads["b"] = dy2.sum(axis=0)
        return dy @ self.params["W"].T


class LSTM(Layer):
    """Unidirectional LSTM over the time axis of ``(B, T, D)`` input.

    Gate order in the stacked weights is input, forget, cell, output. The
    initial hidden and cell states are zero.
    """

    trainable = True

    def __init__(self, d_in, hidden, rng=None):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        self.d_in, self.hidden = d_in, hidden
        H = hidden
        self.params["W"] = glorot_uniform(rng, (d_in, 4 * H), d_in, 4 * H)
        self.params["U"] = glorot_uniform(rng, (H, 4 * H), H, 4 * H)
        self.params["b"] = np.zeros(4 * H)

    def forward(self, x):
        B, T, _ = x.shape
        H = self.hidden
        W, U, b = self.params["W"], self.params["U"], self.params["b"]
        xw = x @ W + b  # input projection for all steps at once
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        hs = np.empty((B, T, H))
        cache = []
        for t in range(T):
            a = xw[:, t] + h @ U
            i = _sigmoid(a[:, :H])
            f = _sigmoid(a[:, H : 2 * H])
            g = np.tanh(a[:, 2 * H : 3 * H])
            o = _sigmoid(a[:, 3 * H :])
            c_prev = c
            c = f * c_prev + i * g
            tc = np.tanh(c)
            h_prev = h
            h = o * tc
            hs[:, t] = h
            cache.append((i, f, g, o, c_prev, tc, h_prev))
        self._x = x
        self._cache = cache
        return hs

    def backward(self, dy):
        x = self._x
        B, T, _ = x.shape
        H = self.hidden
        U = self.params["U"]
        da_all = np.empty((B, T, 4 * H))
        dU = np.zeros_like(U)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            i, f, g, o, c_prev, tc, h_prev = self._cache[t]
            dh = dy[:, t] + dh_next
            do = dh * tc
            dc = dh * o * (1.0 - tc * tc) + dc_next
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            da = np.concatenate(
                [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)], axis=1
            )
            da_all[:, t] = da
            dU += h_prev.T @ da
            dh_next = da @ U.T
            dc_next = dc * f
        da2 = da_all.reshape(B * T, 4 * H)
        self.grads["W"] = x.reshape(B * T, -1).T @ da2
        self.grads["U"] = dU
        self.grads["b"] = da2.sum(axis=0)
        return da_all @ self.params["W"].T
