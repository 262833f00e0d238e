"""Iterative radix-2 FFT over the last axis.

Self-contained Cooley-Tukey implementation so the spectral path has no
dependency on a library transform; tests pin it against a direct-summation
DFT. Inputs must have power-of-two length along the last axis.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParamError


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft(x: np.ndarray) -> np.ndarray:
    """Complex DFT of x along the last axis (length must be a power of two)."""
    x = np.asarray(x)
    n = x.shape[-1]
    if n == 0 or n & (n - 1):
        raise InvalidParamError(f"FFT length must be a power of two, got {n}")
    out = np.array(x, dtype=np.complex128)
    if n == 1:
        return out
    out = out[..., _bit_reverse_indices(n)]

    m = 2
    while m <= n:
        half = m // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / m)
        grouped = out.reshape(out.shape[:-1] + (n // m, m))
        upper = grouped[..., :half].copy()  # the in-place write below must not alias it
        lower = grouped[..., half:] * twiddle
        grouped[..., :half] = upper + lower
        grouped[..., half:] = upper - lower
        m *= 2
    return out


def rfft_onesided(x: np.ndarray) -> np.ndarray:
    """One-sided spectrum of a real signal: bins 0..n/2 inclusive."""
    n = x.shape[-1]
    return fft(x)[..., : n // 2 + 1]


def dft_direct(x: np.ndarray) -> np.ndarray:
    """O(n^2) direct-summation DFT; the reference the fast path is tested against."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[-1]
    j = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(j, j) / n)
    return x @ basis
