"""Central-finite-difference gradient checking.

Checks both the parameter gradients and the input gradient of any object
implementing the layer interface (forward/backward/params/grads). Above
10^4 scalar parameters a seeded subsample is checked instead of every entry;
step size is scaled per entry, h = 1e-6 * max(1, |theta|).

The error for one entry is |analytic - numeric| / max(|analytic|, |numeric|,
floor). The floor marks where the comparison turns absolute: with h = 1e-6
and losses of order one, the numeric gradient carries rounding noise around
1e-11 to 1e-10, so gradients below the default floor of 1e-4 are compared
on that absolute scale instead of blowing the noise up relatively. A wrong
gradient bigger than the floor is still caught through the |analytic| term.
"""

from __future__ import annotations

import numpy as np

from ..seeding import derive_seed, make_rng
from .losses import get_loss

_SUBSAMPLE_THRESHOLD = 10_000
_DEFAULT_SUBSAMPLE = 2_048


def _entry_indices(size: int, cap: int, seed: int) -> np.ndarray:
    if size <= cap:
        return np.arange(size)
    rng = make_rng(seed)
    return np.sort(rng.choice(size, size=cap, replace=False))


def gradcheck(model, x: np.ndarray, target: np.ndarray, loss: str = "mse", *,
              seed: int = 0, subsample: int = _DEFAULT_SUBSAMPLE,
              check_input: bool = True, floor: float = 1e-4) -> float:
    """Return the worst relative error between analytic and numeric gradients."""
    loss_fn = get_loss(loss)
    # a fresh contiguous copy: input entries are perturbed in place below
    x = np.array(x, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)

    def loss_value() -> float:
        return loss_fn(model.forward(x), target)[0]

    value, grad_loss = loss_fn(model.forward(x), target)
    grad_input = model.backward(grad_loss)
    analytic_params = [g.copy() for g in model.grads()]

    worst = 0.0

    def compare(analytic: float, numeric: float) -> None:
        nonlocal worst
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
        if rel > worst:
            worst = rel

    params = model.params()
    total = sum(p.size for p in params)
    cap_total = total if total <= _SUBSAMPLE_THRESHOLD else subsample
    for pi, (param, analytic) in enumerate(zip(params, analytic_params)):
        # spread the sample budget across parameter tensors by size
        share = param.size if total <= _SUBSAMPLE_THRESHOLD else max(
            1, round(cap_total * param.size / total))
        flat_p = param.reshape(-1)
        flat_a = analytic.reshape(-1)
        for idx in _entry_indices(param.size, share, derive_seed(seed, "gradcheck", pi)):
            original = flat_p[idx]
            h = 1e-6 * max(1.0, abs(original))
            flat_p[idx] = original + h
            plus = loss_value()
            flat_p[idx] = original - h
            minus = loss_value()
            flat_p[idx] = original
            compare(flat_a[idx], (plus - minus) / (2.0 * h))

    if check_input:
        flat_x = x.reshape(-1)
        flat_g = np.asarray(grad_input).reshape(-1)
        cap = x.size if x.size <= _SUBSAMPLE_THRESHOLD else subsample
        for idx in _entry_indices(x.size, cap, derive_seed(seed, "gradcheck-input")):
            original = flat_x[idx]
            h = 1e-6 * max(1.0, abs(original))
            flat_x[idx] = original + h
            plus = loss_value()
            flat_x[idx] = original - h
            minus = loss_value()
            flat_x[idx] = original
            compare(flat_g[idx], (plus - minus) / (2.0 * h))

    # leave the model's caches in a coherent state for any later backward
    model.forward(x)
    return worst
