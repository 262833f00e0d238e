"""Scalar losses with analytic gradients, averaged over every element."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidParamError, ShapeMismatchError

_BCE_EPS = 1e-7


def _check_pair(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ShapeMismatchError(f"prediction {pred.shape} vs target {target.shape}")
    if pred.size == 0:
        raise ShapeMismatchError("empty tensors")
    return pred, target


def mse(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    pred, target = _check_pair(pred, target)
    diff = pred - target
    value = float(np.mean(diff * diff))
    return value, (2.0 / diff.size) * diff


def bce(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy; predictions clamped to [1e-7, 1 - 1e-7].

    The gradient is that of the clamped function, so it is zero wherever the
    clamp is active; finite differences agree with this convention.
    """
    pred, target = _check_pair(pred, target)
    p = np.clip(pred, _BCE_EPS, 1.0 - _BCE_EPS)
    value = float(-np.mean(target * np.log(p) + (1.0 - target) * np.log(1.0 - p)))
    inside = (pred > _BCE_EPS) & (pred < 1.0 - _BCE_EPS)
    grad = np.where(inside, (p - target) / (p * (1.0 - p)), 0.0) / p.size
    return value, grad


LOSSES = {"mse": mse, "bce": bce}


def get_loss(kind: str):
    try:
        return LOSSES[kind.lower()]
    except KeyError:
        raise InvalidParamError(f"unknown loss {kind!r}; choose from {sorted(LOSSES)}") from None
