"""Convolutional denoising auto-encoder: build, train, denoise, score.

The stack is Conv(32)+ReLU, pool, Conv(64)+ReLU, pool, Conv(64)+ReLU,
upsample, Conv(32)+ReLU, upsample, Conv(C)+Sigmoid. Two 2x2 pools mean the
input sides must be divisible by 4; the two nearest-neighbor upsamples
restore them exactly, so output shape always equals input shape.

Training minimizes the loss between the model's output for the NOISY image
and the CLEAN target. Everything is seeded: the train/validation split, the
per-epoch shuffles, and the weight init, so a fixed config reproduces the
trace bit for bit.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyTraceError,
    InvalidParamError,
    NonFiniteActivationError,
    NonFiniteLossError,
    ShapeMismatchError,
    ShapeNotDivisibleError,
    TooFewPairsError,
)
from .nn import Adam, Conv2D, MaxPool2x2, ReLU, Sequential, Sigmoid, UpsampleNearest2x2, get_loss
from .seeding import derive_seed, make_rng
from .stft import SpectrogramImage

ENCODER_FILTERS = (32, 64)
DECODER_FILTERS = (64, 32)


class CdaeModel:
    """A Sequential stack plus the H x W x C shape it was built for."""

    def __init__(self, net: Sequential, input_shape: tuple[int, int, int]):
        self.net = net
        self.input_shape = tuple(input_shape)

    def forward(self, x):
        return self.net.forward(x)

    def backward(self, grad_out):
        return self.net.backward(grad_out)

    def params(self):
        return self.net.params()

    def grads(self):
        return self.net.grads()


def build(input_shape: tuple[int, int, int], seed: int = 0) -> CdaeModel:
    if len(input_shape) != 3:
        raise InvalidParamError(f"input_shape must be (H, W, C), got {input_shape}")
    h, w, c = input_shape
    if h % 4 or w % 4:
        raise ShapeNotDivisibleError(
            f"H and W must be divisible by 4 (two 2x2 pools), got {h}x{w}")
    if h < 4 or w < 4 or c < 1:
        raise InvalidParamError(f"degenerate input shape {input_shape}")
    f1, f2 = ENCODER_FILTERS
    d1, d2 = DECODER_FILTERS

    def conv(i, cin, cout, init="he"):
        return Conv2D(cin, cout, 3, seed=derive_seed(seed, "conv", i), init=init)

    net = Sequential([
        conv(0, c, f1), ReLU(), MaxPool2x2(),
        conv(1, f1, f2), ReLU(), MaxPool2x2(),
        conv(2, f2, d1), ReLU(), UpsampleNearest2x2(),
        conv(3, d1, d2), ReLU(), UpsampleNearest2x2(),
        conv(4, d2, c, init="glorot"), Sigmoid(),
    ])
    model = CdaeModel(net, (h, w, c))
    probe = net.forward(np.zeros((1, h, w, c)))
    if probe.shape != (1, h, w, c):
        raise ShapeMismatchError(
            f"decoder failed to restore shape: {probe.shape[1:]} from {(h, w, c)}")
    return model


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 8
    lr: float = 1e-3
    loss_kind: str = "mse"
    val_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidParamError("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidParamError("batch_size must be >= 1")
        if not (self.lr > 0):
            raise InvalidParamError("lr must be > 0")
        if not (0.0 < self.val_fraction < 1.0):
            raise InvalidParamError("val_fraction must lie in (0, 1)")
        get_loss(self.loss_kind)


@dataclass(frozen=True)
class EpochTrace:
    epoch: int  # 1-based
    train_loss: float
    val_loss: float
    wall_time_s: float


def _pixels(image) -> np.ndarray:
    if isinstance(image, SpectrogramImage):
        return image.pixels
    return np.asarray(image, dtype=np.float64)


def split_indices(n: int, val_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded train/validation index split; at least one image on each side."""
    if n < 2:
        raise TooFewPairsError(f"need at least 2 pairs to split, got {n}")
    perm = make_rng(derive_seed(seed, "split")).permutation(n)
    n_val = max(1, round(val_fraction * n))
    if n_val >= n:
        raise TooFewPairsError(f"validation split consumes all {n} pairs")
    return perm[n_val:], perm[:n_val]


def train(model: CdaeModel, pairs, cfg: TrainConfig) -> list[EpochTrace]:
    """Seeded split + shuffled mini-batch Adam; returns the full epoch trace."""
    if len(pairs) < 2:
        raise TooFewPairsError(f"need at least 2 (noisy, clean) pairs, got {len(pairs)}")
    for i, pair in enumerate(pairs):
        for side in pair:
            shape = _pixels(side).shape
            if shape != model.input_shape:
                raise ShapeMismatchError(
                    f"pair {i} has shape {shape}, model expects {model.input_shape}")
    noisy = np.stack([_pixels(p[0]) for p in pairs])
    clean = np.stack([_pixels(p[1]) for p in pairs])

    train_idx, val_idx = split_indices(len(pairs), cfg.val_fraction, cfg.seed)

    loss_fn = get_loss(cfg.loss_kind)
    optimizer = Adam(model.params(), lr=cfg.lr)
    trace: list[EpochTrace] = []

    def batches(indices):
        for start in range(0, len(indices), cfg.batch_size):
            yield indices[start : start + cfg.batch_size]

    def eval_loss(indices) -> float:
        total = 0.0
        for batch in batches(indices):
            value, _ = loss_fn(model.forward(noisy[batch]), clean[batch])
            total += value * len(batch)
        return total / len(indices)

    for epoch in range(1, cfg.epochs + 1):
        started = time.perf_counter()
        order = train_idx[make_rng(derive_seed(cfg.seed, "epoch", epoch)).permutation(len(train_idx))]
        running = 0.0
        try:
            for batch in batches(order):
                value, grad = loss_fn(model.forward(noisy[batch]), clean[batch])
                if not math.isfinite(value):
                    raise NonFiniteLossError(
                        f"non-finite training loss at epoch {epoch}", trace=trace)
                model.backward(grad)
                optimizer.step(model.grads())
                running += value * len(batch)
            val_loss = eval_loss(val_idx)
        except NonFiniteActivationError as exc:
            raise NonFiniteLossError(
                f"non-finite activation at epoch {epoch}: {exc}", trace=trace) from exc
        if not math.isfinite(val_loss):
            raise NonFiniteLossError(
                f"non-finite validation loss at epoch {epoch}", trace=trace)
        trace.append(EpochTrace(
            epoch=epoch,
            train_loss=running / len(train_idx),
            val_loss=val_loss,
            wall_time_s=time.perf_counter() - started,
        ))
    return trace


def denoise(model: CdaeModel, noisy):
    """Pure forward pass on one image; returns the same type it was given."""
    if isinstance(noisy, SpectrogramImage):
        out = denoise(model, noisy.pixels)
        return SpectrogramImage(out, source_id=noisy.source_id, db_floor=noisy.db_floor)
    pixels = np.asarray(noisy, dtype=np.float64)
    if pixels.shape != model.input_shape:
        raise ShapeMismatchError(f"image {pixels.shape}, model expects {model.input_shape}")
    return model.forward(pixels[None])[0]


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB for images in [0, 1]; equal images give inf."""
    a = _pixels(a)
    b = _pixels(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{a.shape} vs {b.shape}")
    for name, img in (("first", a), ("second", b)):
        if img.size == 0 or img.min() < 0.0 or img.max() > 1.0:
            raise InvalidParamError(f"{name} image must be non-empty with values in [0, 1]")
    mse_val = float(np.mean((a - b) ** 2))
    if mse_val == 0.0:
        return float("inf")
    return 10.0 * math.log10(1.0 / mse_val)


@dataclass(frozen=True)
class MinLoss:
    value: float
    epoch: int


def min_loss(trace: list[EpochTrace]) -> MinLoss:
    """Minimum validation loss and its (1-based) epoch; ties go to the earliest."""
    if not trace:
        raise EmptyTraceError("empty epoch trace")
    best = trace[0]
    for entry in trace[1:]:
        if entry.val_loss < best.val_loss:
            best = entry
    return MinLoss(value=best.val_loss, epoch=best.epoch)
