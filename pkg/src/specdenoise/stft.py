"""Short-time Fourier transform and spectrogram image rendering.

The pipeline is: slide a tapered window over a segment, take the one-sided
DFT of each frame (zero-padded to `fft_len`), then map log magnitudes into a
[0, 1] image. Normalization is peak-relative with a fixed dB floor, so the
image is invariant to global scaling of the signal and noise at a given
noise factor is comparable across images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadShapeError, InvalidParamError, WindowTooLongError
from .fourier import rfft_onesided
from .timeseries import Segment

EPS_MAGNITUDE = 1e-12

WINDOW_KINDS = ("hann", "hamming", "rectangular")


@dataclass(frozen=True)
class StftConfig:
    window_len: int = 64
    overlap: int = 32
    window_kind: str = "hann"
    fft_len: int = 64

    def __post_init__(self):
        if self.window_len < 2:
            raise InvalidParamError("window_len must be >= 2")
        if not (0 <= self.overlap < self.window_len):
            raise InvalidParamError("overlap must satisfy 0 <= overlap < window_len")
        if self.window_kind not in WINDOW_KINDS:
            raise InvalidParamError(f"window_kind must be one of {WINDOW_KINDS}")
        if self.fft_len < self.window_len:
            raise InvalidParamError("fft_len must be >= window_len")
        if self.fft_len & (self.fft_len - 1):
            raise InvalidParamError("fft_len must be a power of two")

    @property
    def step(self) -> int:
        return self.window_len - self.overlap


@dataclass(frozen=True)
class StftGrid:
    """One-sided complex spectrum per frame: rows = frequency bins, cols = frames."""

    values: np.ndarray
    bin_hz: float
    frame_step_s: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2:
            raise BadShapeError("grid values must be 2-D (bins x frames)")
        if not np.isfinite(values.view(np.float64)).all():
            raise InvalidParamError("grid values must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SpectrogramImage:
    """H x W x C pixel tensor in [0, 1] plus rendering provenance."""

    pixels: np.ndarray
    source_id: str = ""
    db_floor: float = -80.0

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3:
            raise BadShapeError("pixels must be H x W x C")
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
            raise InvalidParamError("pixels must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.pixels.shape


def make_window(kind: str, length: int) -> np.ndarray:
    n = np.arange(length, dtype=np.float64)
    if kind == "hann":
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / (length - 1))
    if kind == "hamming":
        return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / (length - 1))
    if kind == "rectangular":
        return np.ones(length)
    raise InvalidParamError(f"unknown window kind {kind!r}")


def frame_count(segment_len: int, window_len: int, overlap: int) -> int:
    return (segment_len - window_len) // (window_len - overlap) + 1


def stft(seg: Segment, cfg: StftConfig, sample_rate_hz: float = 1.0) -> StftGrid:
    """Windowed one-sided DFT of each frame; frames hop by window_len - overlap."""
    samples = seg.samples
    if len(samples) < cfg.window_len:
        raise WindowTooLongError(
            f"segment of {len(samples)} samples is shorter than window_len={cfg.window_len}"
        )
    n_frames = frame_count(len(samples), cfg.window_len, cfg.overlap)
    window = make_window(cfg.window_kind, cfg.window_len)

    frames = np.zeros((n_frames, cfg.fft_len), dtype=np.float64)
    for t in range(n_frames):
        start = t * cfg.step
        frames[t, : cfg.window_len] = window * samples[start : start + cfg.window_len]
    spectrum = rfft_onesided(frames)  # (frames, bins)
    return StftGrid(
        values=spectrum.T,
        bin_hz=sample_rate_hz / cfg.fft_len,
        frame_step_s=cfg.step / sample_rate_hz,
    )


def to_image(
    grid: StftGrid,
    shape: tuple[int, int, int] = (64, 64, 1),
    db_floor: float = -80.0,
    source_id: str = "",
) -> SpectrogramImage:
    """Render the grid's log magnitude as a normalized image.

    pixel = clamp((dB - (peak_dB + db_floor)) / (-db_floor), 0, 1), so the
    global peak maps to 1.0 and anything db_floor below the peak maps to 0.0.
    """
    h, w, c = shape
    if h < 8 or w < 8:
        raise BadShapeError("image sides must be >= 8")
    if c not in (1, 3):
        raise BadShapeError("channel count must be 1 or 3")
    if not (db_floor < 0):
        raise InvalidParamError("db_floor must be negative (e.g. -80)")

    magnitude = np.abs(grid.values)
    db = 20.0 * np.log10(magnitude + EPS_MAGNITUDE)
    peak_db = db.max()
    norm = np.clip((db - (peak_db + db_floor)) / (-db_floor), 0.0, 1.0)
    resized = resize_bilinear(norm[:, :, None], (h, w))[:, :, 0]

    if c == 1:
        pixels = resized[:, :, None]
    else:
        pixels = apply_colormap(resized)
    return SpectrogramImage(pixels=pixels, source_id=source_id, db_floor=db_floor)


def resize_bilinear(img: np.ndarray, out_hw: tuple[int, int]) -> np.ndarray:
    """Corner-aligned bilinear resize of an H x W x C array."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3:
        raise BadShapeError("expected H x W x C input")
    h, w, _ = img.shape
    out_h, out_w = out_hw
    if h < 2 or w < 2:
        raise BadShapeError("input sides must be >= 2")
    if out_h < 1 or out_w < 1:
        raise BadShapeError("output sides must be >= 1")

    ys = np.arange(out_h) * ((h - 1) / (out_h - 1)) if out_h > 1 else np.zeros(1)
    xs = np.arange(out_w) * ((w - 1) / (out_w - 1)) if out_w > 1 else np.zeros(1)
    y0 = np.minimum(ys.astype(np.intp), h - 2)
    x0 = np.minimum(xs.astype(np.intp), w - 2)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]

    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x0 + 1] * fx
    bottom = img[y0 + 1][:, x0] * (1 - fx) + img[y0 + 1][:, x0 + 1] * fx
    return top * (1 - fy) + bottom * fy


def _cubehelix_table(n: int = 256) -> np.ndarray:
    """Fixed perceptual colormap: the cubehelix scheme (Green 2011), default knobs.

    Monotonically increasing lightness with a rotating hue; defined by a
    closed form, so the table is reproducible from this function alone.
    """
    start, rotations, hue, gamma = 0.5, -1.5, 1.0, 1.0
    t = np.linspace(0.0, 1.0, n) ** gamma
    angle = 2.0 * np.pi * (start / 3.0 + rotations * np.linspace(0.0, 1.0, n))
    amp = hue * t * (1.0 - t) / 2.0
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    r = t + amp * (-0.14861 * cos_a + 1.78277 * sin_a)
    g = t + amp * (-0.29227 * cos_a - 0.90649 * sin_a)
    b = t + amp * (1.97294 * cos_a)
    return np.clip(np.stack([r, g, b], axis=1), 0.0, 1.0)


_COLORMAP = _cubehelix_table()


def apply_colormap(gray: np.ndarray) -> np.ndarray:
    """Map a [0,1] grayscale H x W array through the 256-entry RGB lookup table."""
    idx = np.clip(np.rint(gray * 255.0).astype(np.intp), 0, 255)
    return _COLORMAP[idx]
