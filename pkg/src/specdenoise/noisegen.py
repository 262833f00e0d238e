"""Standardized noise fields: eight distributions, first-order coloring, injection.

Every sampler is built on uniform draws from a seeded PCG64 stream and is
standardized analytically to zero mean and unit variance, so the downstream
power calibration is the same for all distributions. Coloring runs the
recursion y[0] = x[0], y[n] = a*y[n-1] + sqrt(1-a^2)*x[n], the stationary
unit-variance form of the one-pole low-pass G(z) = sqrt(1-a^2)/(1 - a z^-1).

Injection scales a field to an exact noise-power/signal-power ratio (the
noise factor), adds it to the clean image, and clamps to [0, 1]. Calibration
happens before the clamp: clamping distorts power at high noise factors, so
the pre-clamp ratio is the contract.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateVarianceError,
    InvalidParamError,
    TooFewSamplesError,
)
from .seeding import derive_seed, make_rng
from .stft import SpectrogramImage


class DistKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    RAISED_COSINE = "raised_cosine"
    WIGNER_SEMICIRCLE = "wigner_semicircle"
    LAPLACE = "laplace"
    DOUBLE_EXPONENTIAL = "double_exponential"
    HYPERBOLIC_SECANT = "hyperbolic_secant"
    LOGISTIC = "logistic"
    WEIBULL = "weibull"


SUB_GAUSSIAN = (DistKind.UNIFORM, DistKind.RAISED_COSINE, DistKind.WIGNER_SEMICIRCLE)
SUPER_GAUSSIAN = (
    DistKind.LAPLACE,
    DistKind.DOUBLE_EXPONENTIAL,
    DistKind.HYPERBOLIC_SECANT,
    DistKind.LOGISTIC,
)


def gaussianity_label(kind: DistKind) -> str:
    # Weibull has positive kurtosis too, but it is kept as its own family:
    # it is the one skewed option, the others are all symmetric
    if kind in SUB_GAUSSIAN:
        return "sub-gaussian"
    if kind in SUPER_GAUSSIAN:
        return "super-gaussian"
    if kind is DistKind.WEIBULL:
        return "skewed"
    return "gaussian"


class ColoringAxis(str, enum.Enum):
    TIME = "time"          # filter each image row (constant-frequency trace) independently
    FLATTENED = "flattened"  # filter the row-major pixel order as one sequence


@dataclass(frozen=True)
class Distribution:
    kind: DistKind
    weibull_k: float = 1.5

    def __post_init__(self):
        kind = DistKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is DistKind.WEIBULL and not (self.weibull_k > 0):
            raise InvalidParamError("weibull_k must be > 0")


@dataclass(frozen=True)
class NoiseSpec:
    """Fully determines one corruption: distribution, power, color, seed."""

    dist: Distribution
    noise_factor: float
    coloring_a: float = 0.0
    seed: int = 0
    coloring_axis: ColoringAxis = ColoringAxis.TIME

    def __post_init__(self):
        if not (self.noise_factor >= 0 and math.isfinite(self.noise_factor)):
            raise InvalidParamError("noise_factor must be >= 0")
        if not (0.0 <= self.coloring_a < 1.0):
            raise InvalidParamError("coloring_a must lie in [0, 1)")
        object.__setattr__(self, "coloring_axis", ColoringAxis(self.coloring_axis))


# --- samplers ----------------------------------------------------------------

# Standardization constants (analytic, unit-variance scale factors).
_LAPLACE_B = 1.0 / math.sqrt(2.0)          # variance of Laplace(b) is 2 b^2
_LOGISTIC_S = math.sqrt(3.0) / math.pi     # variance of Logistic(s) is s^2 pi^2 / 3
_RCOS_SIGMA = math.sqrt(1.0 / 3.0 - 2.0 / math.pi**2)  # raised cosine on [-1, 1]
_UNIFORM_SCALE = math.sqrt(12.0)           # variance of U(0,1) is 1/12
_SEMICIRCLE_SCALE = 2.0                    # variance of unit semicircle is 1/4

_TINY = 1e-300


def weibull_mean_std(k: float) -> tuple[float, float]:
    mean = math.gamma(1.0 + 1.0 / k)
    var = math.gamma(1.0 + 2.0 / k) - mean**2
    return mean, math.sqrt(var)


def sample_standardized(dist: Distribution, n: int, seed: int) -> np.ndarray:
    """n i.i.d. draws with exactly zero population mean and unit population variance."""
    if n < 1:
        raise InvalidParamError("n must be >= 1")
    rng = make_rng(seed)
    kind = dist.kind

    if kind is DistKind.GAUSSIAN:
        return _box_muller(rng, n)
    if kind is DistKind.UNIFORM:
        return (rng.random(n) - 0.5) * _UNIFORM_SCALE
    if kind is DistKind.RAISED_COSINE:
        return _raised_cosine_inverse_cdf(rng.random(n)) / _RCOS_SIGMA
    if kind is DistKind.WIGNER_SEMICIRCLE:
        return _semicircle_rejection(rng, n) * _SEMICIRCLE_SCALE
    if kind in (DistKind.LAPLACE, DistKind.DOUBLE_EXPONENTIAL):
        u = rng.random(n) - 0.5
        return -_LAPLACE_B * np.sign(u) * np.log(np.maximum(1.0 - 2.0 * np.abs(u), _TINY))
    if kind is DistKind.HYPERBOLIC_SECANT:
        u = np.clip(rng.random(n), 1e-15, 1.0 - 1e-16)
        return (2.0 / math.pi) * np.log(np.tan(0.5 * math.pi * u))
    if kind is DistKind.LOGISTIC:
        u = np.clip(rng.random(n), _TINY, 1.0 - 1e-16)
        return _LOGISTIC_S * np.log(u / (1.0 - u))
    if kind is DistKind.WEIBULL:
        k = dist.weibull_k
        u = rng.random(n)
        raw = np.power(-np.log(np.maximum(1.0 - u, _TINY)), 1.0 / k)
        mean, std = weibull_mean_std(k)
        return (raw - mean) / std
    raise InvalidParamError(f"unknown distribution kind {kind!r}")


def _box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    pairs = (n + 1) // 2
    u1 = 1.0 - rng.random(pairs)  # (0, 1]: keeps the log finite
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]


def _raised_cosine_inverse_cdf(u: np.ndarray) -> np.ndarray:
    # CDF on [-1, 1]: F(x) = (x + 1)/2 + sin(pi x)/(2 pi); solved by bisection.
    # 60 halvings of the bracket put the CDF error below 1e-12 (density <= 1).
    lo = np.full_like(u, -1.0)
    hi = np.full_like(u, 1.0)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        cdf = 0.5 * (mid + 1.0) + np.sin(np.pi * mid) / (2.0 * np.pi)
        below = cdf < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _semicircle_rejection(rng: np.random.Generator, n: int) -> np.ndarray:
    # Uniform rejection under the semicircle arc; acceptance rate pi/4.
    out = np.empty(n)
    filled = 0
    while filled < n:
        batch = max(64, int((n - filled) * 1.5))
        x = rng.random(batch) * 2.0 - 1.0
        y = rng.random(batch)
        accepted = x[y * y <= 1.0 - x * x]
        take = min(accepted.size, n - filled)
        out[filled : filled + take] = accepted[:take]
        filled += take
    return out


# --- coloring ----------------------------------------------------------------

def color(white: np.ndarray, a: float) -> np.ndarray:
    """Color a 1-D sequence with the one-pole recursion; a = 0 returns it unchanged."""
    if not (0.0 <= a < 1.0):
        raise InvalidParamError("coloring parameter must lie in [0, 1)")
    x = np.asarray(white, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidParamError("expected a non-empty 1-D sequence")
    if a == 0.0:
        return x.copy()
    gain = math.sqrt(1.0 - a * a)
    values = x.tolist()
    prev = values[0]
    out = [prev]
    append = out.append
    for xi in values[1:]:
        prev = a * prev + gain * xi
        append(prev)
    return np.asarray(out)


def _color_rows(rows: np.ndarray, a: float) -> np.ndarray:
    """Same recursion applied along the last axis of a 2-D array (vectorized over rows)."""
    if a == 0.0:
        return rows.copy()
    gain = math.sqrt(1.0 - a * a)
    out = np.empty_like(rows)
    out[:, 0] = rows[:, 0]
    for i in range(1, rows.shape[1]):
        out[:, i] = a * out[:, i - 1] + gain * rows[:, i]
    return out


# --- fields and injection -----------------------------------------------------

def sample_field(spec: NoiseSpec, shape: tuple[int, ...]) -> np.ndarray:
    """Standardized field matching `shape`, colored along the requested axis."""
    size = int(np.prod(shape))
    draws = sample_standardized(spec.dist, size, derive_seed(spec.seed, "noise-field"))
    if spec.coloring_axis is ColoringAxis.FLATTENED or len(shape) < 2:
        return _color_rows(draws[None, :], spec.coloring_a).reshape(shape)
    h, w = shape[0], shape[1]
    rest = size // (h * w)
    # rows = constant-frequency traces: filter along the width axis per (row, channel)
    field = draws.reshape(h, w, rest).transpose(0, 2, 1).reshape(h * rest, w)
    field = _color_rows(field, spec.coloring_a)
    return field.reshape(h, rest, w).transpose(0, 2, 1).reshape(shape)


def noise_for(clean_pixels: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    """The exact additive noise `inject` would apply, before clamping.

    Scaled so sample variance(noise) / sample variance(clean) equals the
    noise factor exactly (population-style variance on both sides).
    """
    clean_pixels = np.asarray(clean_pixels, dtype=np.float64)
    if spec.noise_factor == 0.0:
        return np.zeros_like(clean_pixels)
    signal_power = float(clean_pixels.var())
    if signal_power == 0.0:
        return np.zeros_like(clean_pixels)
    fld = sample_field(spec, clean_pixels.shape)
    field_power = float(fld.var())
    if field_power == 0.0:
        raise InvalidParamError("degenerate noise field (zero variance)")
    return fld * math.sqrt(spec.noise_factor * signal_power / field_power)


def inject(clean, spec: NoiseSpec):
    """Add calibrated noise to a clean image and clamp to [0, 1].

    Accepts a SpectrogramImage or a raw H x W x C array and returns the same
    type. A zero noise factor returns the input pixels bit-exactly.
    """
    if isinstance(clean, SpectrogramImage):
        noisy = inject(clean.pixels, spec)
        return SpectrogramImage(noisy, source_id=clean.source_id, db_floor=clean.db_floor)
    pixels = np.asarray(clean, dtype=np.float64)
    if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
        raise InvalidParamError("clean pixels must lie in [0, 1]")
    if spec.noise_factor == 0.0:
        return pixels.copy()
    return np.clip(pixels + noise_for(pixels, spec), 0.0, 1.0)


# --- moment estimation ---------------------------------------------------------

@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float


def estimate_moments(x: np.ndarray) -> Moments:
    """Sample mean, unbiased variance, and biased-moment skewness/excess kurtosis."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n < 4:
        raise TooFewSamplesError(f"need at least 4 samples, got {n}")
    mean = float(x.mean())
    centered = x - mean
    m2 = float(np.mean(centered**2))
    if m2 == 0.0:
        raise DegenerateVarianceError("constant sequence: higher moments undefined")
    m3 = float(np.mean(centered**3))
    m4 = float(np.mean(centered**4))
    return Moments(
        mean=mean,
        variance=float(centered.dot(centered) / (n - 1)),
        skewness=m3 / m2**1.5,
        excess_kurtosis=m4 / m2**2 - 3.0,
    )
