"""Accelerometer ingestion, synthetic surrogate signals, and segmentation.

A recording is a uniformly sampled scalar trace (one accelerometer axis).
Real data comes from CSV files with one column per axis; when no recording is
available, `synthesize` produces a surrogate with movement-like transient
bursts on top of a stationary baseline.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    EmptyFileError,
    InvalidParamError,
    MalformedRowError,
    MissingColumnError,
    TooShortError,
)
from .seeding import derive_seed, make_rng

DEFAULT_SEGMENT_LEN = 300

# Default CSV schema: one column per axis, optional time column in seconds.
DEFAULT_COLUMN_MAP = {"x": "ax", "y": "ay", "z": "az", "t": "t"}


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar signal."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise InvalidParamError("samples must be a non-empty 1-D sequence")
        if not np.isfinite(samples).all():
            raise InvalidParamError("samples must all be finite")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise InvalidParamError("sample_rate_hz must be positive and finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class Segment:
    """Fixed-length window cut from a TimeSeries."""

    samples: np.ndarray
    source_id: str = ""
    offset: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 2:
            raise InvalidParamError("segment needs at least 2 samples")
        if self.offset < 0:
            raise InvalidParamError("offset must be >= 0")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


def ingest_csv(
    path,
    axis: str = "z",
    sample_rate_hz: float | None = None,
    column_map: dict[str, str] | None = None,
) -> TimeSeries:
    """Read one axis of an accelerometer CSV into a TimeSeries.

    The file must have a header row naming the axis columns (see
    DEFAULT_COLUMN_MAP; override per-deployment with `column_map`). The sample
    rate is either supplied by the caller or derived from the time column.
    Non-numeric or non-finite cells are hard errors reporting row and column.
    """
    axis = axis.lower()
    if axis not in ("x", "y", "z"):
        raise InvalidParamError(f"axis must be one of x/y/z, got {axis!r}")
    colmap = dict(DEFAULT_COLUMN_MAP)
    if column_map:
        colmap.update({k.lower(): v for k, v in column_map.items()})
    col_name = colmap[axis]
    time_name = colmap.get("t")

    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if col_name not in header:
            raise MissingColumnError(
                f"{path}: column {col_name!r} not found (header: {header})"
            )
        col_idx = header.index(col_name)
        time_idx = header.index(time_name) if time_name in header else None

        values: list[float] = []
        times: list[float] = []
        for row_num, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            values.append(_parse_cell(path, row, row_num, col_idx, col_name))
            if time_idx is not None:
                times.append(_parse_cell(path, row, row_num, time_idx, time_name))

    if not values:
        raise EmptyFileError(f"{path}: no data rows")

    if sample_rate_hz is None:
        if len(times) >= 2 and times[-1] > times[0]:
            sample_rate_hz = (len(times) - 1) / (times[-1] - times[0])
        else:
            raise InvalidParamError(
                f"{path}: sample rate not supplied and no usable time column {time_name!r}"
            )
    return TimeSeries(np.asarray(values), sample_rate_hz)


def _parse_cell(path, row, row_num: int, idx: int, name: str) -> float:
    try:
        value = float(row[idx])
    except (ValueError, IndexError):
        cell = row[idx] if idx < len(row) else "<missing>"
        raise MalformedRowError(
            f"{path}: row {row_num}, column {name!r}: not a number ({cell!r})",
            row=row_num,
            column=name,
        ) from None
    if not math.isfinite(value):
        raise MalformedRowError(
            f"{path}: row {row_num}, column {name!r}: non-finite value",
            row=row_num,
            column=name,
        )
    return value


def write_csv(ts: TimeSeries, path, column: str = "az") -> None:
    """Serialize a TimeSeries to the ingestion schema (round-trips numerically)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", column])
        dt = 1.0 / ts.sample_rate_hz
        for i, v in enumerate(ts.samples):
            writer.writerow([repr(i * dt), repr(float(v))])


# Burst geometry for the surrogate generator, in samples. Amplitudes sit
# ~45 dB above the baseline so burst ridges dominate a log-scaled spectrogram
# instead of hovering a few shades above the noise texture.
_BURST_LEN = 100
_BURST_TAU = 25.0
_BASELINE_SIGMA = 0.05


def synthesize(
    seed: int,
    duration_samples: int,
    burst_count: int,
    sample_rate_hz: float = 100.0,
) -> TimeSeries:
    """Deterministic surrogate recording: broadband baseline plus damped-sine bursts.

    Pure function of its arguments; same seed gives bit-identical output.
    """
    if duration_samples < DEFAULT_SEGMENT_LEN:
        raise InvalidParamError(
            f"duration_samples must be >= {DEFAULT_SEGMENT_LEN}, got {duration_samples}"
        )
    if burst_count < 0:
        raise InvalidParamError("burst_count must be >= 0")
    if not (sample_rate_hz > 0 and math.isfinite(sample_rate_hz)):
        raise InvalidParamError("sample_rate_hz must be positive")

    rng = make_rng(derive_seed(seed, "synthesize", duration_samples, burst_count))
    samples = _BASELINE_SIGMA * rng.standard_normal(duration_samples)

    n = np.arange(_BURST_LEN, dtype=np.float64)
    envelope = np.exp(-n / _BURST_TAU)
    for _ in range(burst_count):
        offset = int(rng.integers(0, duration_samples - _BURST_LEN + 1))
        amp = _BASELINE_SIGMA * rng.uniform(180.0, 240.0)
        freq = rng.uniform(0.03, 0.15)  # cycles per sample
        phase = rng.uniform(0.0, 2.0 * np.pi)
        samples[offset : offset + _BURST_LEN] += amp * envelope * np.sin(
            2.0 * np.pi * freq * n + phase
        )
    return TimeSeries(samples, sample_rate_hz)


def segment(
    ts: TimeSeries,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    hop: int | None = None,
    source_id: str = "",
) -> list[Segment]:
    """Cut fixed-length windows at offsets 0, hop, 2*hop, ...; drop the trailing partial."""
    if segment_len < 2:
        raise InvalidParamError("segment_len must be >= 2")
    if hop is None:
        hop = segment_len
    if not (1 <= hop <= segment_len):
        raise InvalidParamError("hop must satisfy 1 <= hop <= segment_len")
    n = len(ts)
    if n < segment_len:
        raise TooShortError(f"series of {n} samples is shorter than segment_len={segment_len}")
    count = (n - segment_len) // hop + 1
    return [
        Segment(ts.samples[i * hop : i * hop + segment_len], source_id=source_id, offset=i * hop)
        for i in range(count)
    ]
