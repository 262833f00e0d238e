"""Bias-corrected Adam, updating parameter arrays in place."""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidParamError, ShapeMismatchError


class Adam:
    def __init__(self, params: list[np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if not params:
            raise InvalidParamError("no parameters to optimize")
        if not (lr > 0 and 0 <= beta1 < 1 and 0 <= beta2 < 1 and eps > 0):
            raise InvalidParamError("bad Adam hyperparameters")
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: list[np.ndarray]) -> None:
        if len(grads) != len(self.params):
            raise ShapeMismatchError(
                f"{len(grads)} gradients for {len(self.params)} parameters")
        for p, g in zip(self.params, grads):
            if p.shape != g.shape:
                raise ShapeMismatchError(f"gradient {g.shape} for parameter {p.shape}")
        self.step_count += 1
        t = self.step_count
        scale1 = 1.0 - self.beta1**t
        scale2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / scale1) / (np.sqrt(v / scale2) + self.eps)
