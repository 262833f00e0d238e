"""Layers for a small from-scratch convolutional network.

Activations are NHWC float64 arrays. Each layer owns its parameters and
parameter gradients and caches whatever its backward pass needs; backward
without a preceding forward is an error, and backward consumes the cache.
Gradients are written (not accumulated) by each backward call.

Convolutions are stride-1 cross-correlations with zero "same" padding, done
as im2col + matmul. The im2col copy is bounded by processing the batch in
chunks whose size depends only on the shapes, so results are bit-identical
regardless of available memory or worker count.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import (
    InvalidParamError,
    NoCachedForwardError,
    NonFiniteActivationError,
    OddSpatialDimError,
    ShapeMismatchError,
)
from ..seeding import make_rng

# im2col chunk budget, in f64 elements (~128 MB); shape-determined, not adaptive
_CHUNK_ELEMS = 1 << 24


def _as_nhwc(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise ShapeMismatchError(f"expected NHWC tensor, got shape {x.shape}")
    return x


class Layer:
    """Common interface; subclasses fill in forward/backward."""

    kind = "layer"

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[np.ndarray]:
        return []

    def grads(self) -> list[np.ndarray]:
        return []

    def _take_cache(self):
        cache = getattr(self, "_cache", None)
        if cache is None:
            raise NoCachedForwardError(f"{self.kind}: backward called without forward")
        self._cache = None
        return cache


def _correlate(padded: np.ndarray, wmat: np.ndarray, k: int, out_ch: int) -> np.ndarray:
    """Stride-1 valid cross-correlation of a padded NHWC tensor with wmat.

    wmat is (C*k*k, out_ch) with the row order matching the (C, ki, kj)
    layout that sliding windows produce.
    """
    windows = sliding_window_view(padded, (k, k), axis=(1, 2))
    n, h, w = windows.shape[0], windows.shape[1], windows.shape[2]
    flat = windows.shape[3] * k * k
    out = np.empty((n, h, w, out_ch))
    step = max(1, _CHUNK_ELEMS // max(1, h * w * flat))
    for start in range(0, n, step):
        block = windows[start : start + step].reshape(-1, flat)
        out[start : start + step] = (block @ wmat).reshape(-1, h, w, out_ch)
    return out


class Conv2D(Layer):
    """3x3 (or any odd square) stride-1 same-padding convolution.

    Weight shape (out_channels, in_channels, k, k), bias (out_channels,).
    Init is He-uniform for ReLU-fed layers, Glorot-uniform for the sigmoid
    output layer; both seeded.
    """

    kind = "conv2d"

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int = 3,
                 *, seed: int = 0, init: str = "he"):
        if in_channels < 1 or out_channels < 1:
            raise InvalidParamError("channel counts must be >= 1")
        if kernel_size < 1 or kernel_size % 2 == 0:
            raise InvalidParamError("kernel_size must be odd (same padding)")
        fan_in = in_channels * kernel_size * kernel_size
        fan_out = out_channels * kernel_size * kernel_size
        if init == "he":
            limit = math.sqrt(6.0 / fan_in)
        elif init == "glorot":
            limit = math.sqrt(6.0 / (fan_in + fan_out))
        else:
            raise InvalidParamError(f"unknown init {init!r}")
        rng = make_rng(seed)
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.weight = rng.uniform(-limit, limit, (out_channels, in_channels, kernel_size, kernel_size))
        self.bias = np.zeros(out_channels)
        self.grad_weight = np.zeros_like(self.weight)
        self.grad_bias = np.zeros_like(self.bias)
        self._cache = None

    def params(self):
        return [self.weight, self.bias]

    def grads(self):
        return [self.grad_weight, self.grad_bias]

    def forward(self, x):
        x = _as_nhwc(x)
        if x.shape[3] != self.in_channels:
            raise ShapeMismatchError(
                f"conv2d expects {self.in_channels} input channels, got {x.shape[3]}")
        k = self.kernel_size
        pad = k // 2
        padded = np.pad(x, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
        # row order of the flattened weight matches the windows' (C, ki, kj) layout
        wmat = self.weight.transpose(1, 2, 3, 0).reshape(-1, self.out_channels)
        out = _correlate(padded, wmat, k, self.out_channels) + self.bias
        self._cache = (padded, x.shape)
        return out

    def backward(self, grad_out):
        padded, x_shape = self._take_cache()
        grad_out = np.asarray(grad_out, dtype=np.float64)
        expected = x_shape[:3] + (self.out_channels,)
        if grad_out.shape != expected:
            raise ShapeMismatchError(f"grad shape {grad_out.shape}, expected {expected}")
        k = self.kernel_size
        pad = k // 2
        self.grad_bias = grad_out.sum(axis=(0, 1, 2))

        windows = sliding_window_view(padded, (k, k), axis=(1, 2))
        n, h, w = grad_out.shape[0], grad_out.shape[1], grad_out.shape[2]
        flat = self.in_channels * k * k
        gw = np.zeros((flat, self.out_channels))
        step = max(1, _CHUNK_ELEMS // max(1, h * w * flat))
        for start in range(0, n, step):
            block = windows[start : start + step].reshape(-1, flat)
            gblock = grad_out[start : start + step].reshape(-1, self.out_channels)
            gw += block.T @ gblock
        self.grad_weight = gw.reshape(self.in_channels, k, k, self.out_channels).transpose(3, 0, 1, 2)

        # grad wrt input: correlate grad_out with spatially flipped, channel-swapped kernels
        flipped = self.weight[:, :, ::-1, ::-1].transpose(0, 2, 3, 1).reshape(-1, self.in_channels)
        padded_grad = np.pad(grad_out, ((0, 0), (pad, pad), (pad, pad), (0, 0)))
        return _correlate(padded_grad, flipped, k, self.in_channels)


class ReLU(Layer):
    kind = "relu"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        x = _as_nhwc(x)
        self._cache = x > 0.0  # gradient at exactly 0 is defined as 0
        return np.maximum(x, 0.0)

    def backward(self, grad_out):
        mask = self._take_cache()
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != mask.shape:
            raise ShapeMismatchError(f"grad shape {grad_out.shape}, expected {mask.shape}")
        return grad_out * mask


class Sigmoid(Layer):
    kind = "sigmoid"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        x = _as_nhwc(x)
        # branch-free stable form: exp(-|x|) never overflows
        decay = np.exp(-np.abs(x))
        y = np.where(x >= 0.0, 1.0 / (1.0 + decay), decay / (1.0 + decay))
        self._cache = y
        return y

    def backward(self, grad_out):
        y = self._take_cache()
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != y.shape:
            raise ShapeMismatchError(f"grad shape {grad_out.shape}, expected {y.shape}")
        return grad_out * y * (1.0 - y)


class MaxPool2x2(Layer):
    kind = "maxpool2x2"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        x = _as_nhwc(x)
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise OddSpatialDimError(f"maxpool2x2 needs even H and W, got {h}x{w}")
        # last axis enumerates the window row-major: (0,0),(0,1),(1,0),(1,1);
        # argmax takes the first maximum, which is the documented tie-break
        windows = x.reshape(n, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(
            n, h // 2, w // 2, c, 4)
        idx = windows.argmax(axis=-1)
        out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
        self._cache = (idx, x.shape)
        return out

    def backward(self, grad_out):
        idx, x_shape = self._take_cache()
        grad_out = np.asarray(grad_out, dtype=np.float64)
        if grad_out.shape != idx.shape:
            raise ShapeMismatchError(f"grad shape {grad_out.shape}, expected {idx.shape}")
        n, h, w, c = x_shape
        routed = np.zeros((n, h // 2, w // 2, c, 4))
        np.put_along_axis(routed, idx[..., None], grad_out[..., None], axis=-1)
        return routed.reshape(n, h // 2, w // 2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(
            n, h, w, c)


class UpsampleNearest2x2(Layer):
    kind = "upsample_nearest2x2"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        x = _as_nhwc(x)
        self._cache = x.shape
        return x.repeat(2, axis=1).repeat(2, axis=2)

    def backward(self, grad_out):
        x_shape = self._take_cache()
        grad_out = np.asarray(grad_out, dtype=np.float64)
        n, h, w, c = x_shape
        if grad_out.shape != (n, 2 * h, 2 * w, c):
            raise ShapeMismatchError(
                f"grad shape {grad_out.shape}, expected {(n, 2 * h, 2 * w, c)}")
        return grad_out.reshape(n, h, 2, w, 2, c).sum(axis=(2, 4))


class Sequential:
    """Ordered layer stack with a finite-value guard after every forward step."""

    def __init__(self, layers: list[Layer]):
        if not layers:
            raise InvalidParamError("empty layer stack")
        self.layers = list(layers)

    def layer_name(self, index: int) -> str:
        return f"{index}:{self.layers[index].kind}"

    def forward(self, x: np.ndarray) -> np.ndarray:
        out = _as_nhwc(x)
        if not np.isfinite(out).all():
            raise NonFiniteActivationError("input")
        for i, layer in enumerate(self.layers):
            out = layer.forward(out)
            if not np.isfinite(out).all():
                raise NonFiniteActivationError(self.layer_name(i))
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        grad = np.asarray(grad_out, dtype=np.float64)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def params(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def grads(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]
