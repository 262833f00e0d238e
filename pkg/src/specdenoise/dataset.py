"""Clean-image datasets: synthesis, on-disk layout, manifest bookkeeping.

A dataset directory holds one .npy file per image under images/ plus a
manifest.csv with columns id,source,offset,shape. Everything is derived
deterministically from a seed, so regenerating a dataset reproduces the
manifest byte for byte.

The desk-scale default is 48 synthetic 64x64x1 spectrograms; paper-scale is
75 images at 256x256x3.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DatasetMissingError, InvalidParamError
from .seeding import derive_seed
from .stft import SpectrogramImage, StftConfig, stft, to_image
from .timeseries import DEFAULT_SEGMENT_LEN, segment, synthesize

DESK_COUNT = 48
DESK_SHAPE = (64, 64, 1)
PAPER_COUNT = 75
PAPER_SHAPE = (256, 256, 3)



@dataclass(frozen=True)
class DatasetEntry:
    image_id: str
    source: str
    offset: int
    pixels: np.ndarray


def build_synthetic(count: int, shape: tuple[int, int, int], seed: int, *,
                    segment_len: int = DEFAULT_SEGMENT_LEN,
                    sample_rate_hz: float = 100.0,
                    stft_config: StftConfig | None = None,
                    burst_count: int = 4,
                    db_floor: float = -80.0) -> list[DatasetEntry]:
    """Synthesize one burst-bearing series per image and render it.

    A series per image (rather than slicing one long recording) guarantees
    every spectrogram carries movement energy; a segment that is all baseline
    would calibrate injected noise against a near-zero signal variance and
    contribute nothing but trivial pairs to training.
    """
    if count < 1:
        raise InvalidParamError("count must be >= 1")
    cfg = stft_config if stft_config is not None else StftConfig()
    entries: list[DatasetEntry] = []
    for j in range(count):
        series = synthesize(derive_seed(seed, "series", j),
                            duration_samples=segment_len,
                            burst_count=burst_count,
                            sample_rate_hz=sample_rate_hz)
        seg = segment(series, segment_len=segment_len, source_id=f"synthetic_{j}")[0]
        grid = stft(seg, cfg, sample_rate_hz=series.sample_rate_hz)
        image = to_image(grid, shape=shape, db_floor=db_floor, source_id=seg.source_id)
        entries.append(DatasetEntry(
            image_id=f"img_{j:04d}",
            source=seg.source_id,
            offset=seg.offset,
            pixels=image.pixels,
        ))
    return entries


def to_spectrogram_images(entries: list[DatasetEntry]) -> list[SpectrogramImage]:
    return [SpectrogramImage(e.pixels, source_id=e.source) for e in entries]


def _shape_text(shape: tuple[int, ...]) -> str:
    return "x".join(str(d) for d in shape)


def save_dataset(entries: list[DatasetEntry], out_dir) -> None:
    if not entries:
        raise InvalidParamError("refusing to write an empty dataset")
    images_dir = os.path.join(out_dir, "images")
    os.makedirs(images_dir, exist_ok=True)
    with open(os.path.join(out_dir, "manifest.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "source", "offset", "shape"])
        for e in entries:
            np.save(os.path.join(images_dir, f"{e.image_id}.npy"), e.pixels)
            writer.writerow([e.image_id, e.source, e.offset, _shape_text(e.pixels.shape)])


def load_dataset(dataset_dir) -> list[DatasetEntry]:
    manifest = os.path.join(dataset_dir, "manifest.csv")
    if not os.path.isfile(manifest):
        raise DatasetMissingError(f"no manifest.csv under {dataset_dir}")
    entries: list[DatasetEntry] = []
    with open(manifest, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"id", "source", "offset", "shape"}:
            raise DataError(f"unexpected manifest columns: {reader.fieldnames}")
        for row in reader:
            path = os.path.join(dataset_dir, "images", f"{row['id']}.npy")
            if not os.path.isfile(path):
                raise DatasetMissingError(f"manifest lists {row['id']} but {path} is absent")
            pixels = np.load(path)
            declared = tuple(int(d) for d in row["shape"].split("x"))
            if pixels.shape != declared:
                raise DataError(
                    f"{row['id']}: manifest says {row['shape']}, file has {pixels.shape}")
            entries.append(DatasetEntry(
                image_id=row["id"],
                source=row["source"],
                offset=int(row["offset"]),
                pixels=pixels,
            ))
    if not entries:
        raise DatasetMissingError(f"manifest under {dataset_dir} lists no images")
    return entries
