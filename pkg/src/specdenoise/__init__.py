"""Spectrogram denoising laboratory.

Accelerometer segments become STFT spectrogram images; calibrated colored
noise from a family of distributions corrupts them; a small from-scratch
convolutional auto-encoder learns to restore them; sweep grids map minimum
loss against noise factor, coloring, and distribution shape.
"""

from .cdae import (
    CdaeModel,
    EpochTrace,
    MinLoss,
    TrainConfig,
    build,
    denoise,
    min_loss,
    psnr,
    train,
)
from .noisegen import (
    ColoringAxis,
    DistKind,
    Distribution,
    Moments,
    NoiseSpec,
    color,
    estimate_moments,
    inject,
    noise_for,
    sample_field,
    sample_standardized,
)
from .seeding import derive_seed, make_rng
from .stft import SpectrogramImage, StftConfig, StftGrid, resize_bilinear, stft, to_image
from .sweep import (
    BestColoring,
    BestNf,
    RunRecord,
    SweepGrid,
    best_coloring,
    best_nf,
    emit_report,
    run_cell,
    run_grid,
)
from .timeseries import Segment, TimeSeries, ingest_csv, segment, synthesize

__version__ = "0.1.0"

__all__ = [
    "BestColoring",
    "BestNf",
    "CdaeModel",
    "ColoringAxis",
    "DistKind",
    "Distribution",
    "EpochTrace",
    "MinLoss",
    "Moments",
    "NoiseSpec",
    "RunRecord",
    "Segment",
    "SpectrogramImage",
    "StftConfig",
    "StftGrid",
    "SweepGrid",
    "TimeSeries",
    "TrainConfig",
    "best_coloring",
    "best_nf",
    "build",
    "color",
    "denoise",
    "derive_seed",
    "emit_report",
    "estimate_moments",
    "ingest_csv",
    "inject",
    "make_rng",
    "min_loss",
    "noise_for",
    "psnr",
    "resize_bilinear",
    "run_cell",
    "run_grid",
    "sample_field",
    "sample_standardized",
    "segment",
    "stft",
    "synthesize",
    "to_image",
    "train",
]
