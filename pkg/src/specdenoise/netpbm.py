"""Binary netpbm writers (PGM P5 for grayscale, PPM P6 for color).

Pixels arrive as floats in [0, 1] and are quantized to 8-bit with np.rint
(ties to even). The format needs no dependencies and
every byte is determined by the input, which keeps image outputs diffable.
"""

from __future__ import annotations

import numpy as np

from .errors import BadShapeError, InvalidParamError


def encode(pixels: np.ndarray) -> bytes:
    """Encode H x W (or H x W x 1) as PGM, H x W x 3 as PPM."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim == 2:
        magic = b"P5"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        magic = b"P6"
    else:
        raise BadShapeError(f"expected HxW, HxWx1, or HxWx3, got {arr.shape}")
    if arr.size == 0:
        raise BadShapeError("empty image")
    if not np.isfinite(arr).all() or arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidParamError("pixels must be finite and in [0, 1]")
    h, w = arr.shape[0], arr.shape[1]
    quantized = np.rint(arr * 255.0).astype(np.uint8)
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + quantized.tobytes()


def write(pixels: np.ndarray, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode(pixels))
