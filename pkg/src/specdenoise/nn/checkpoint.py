"""Model checkpoints: a documented little-endian binary format.

Layout:
    magic   8 bytes  b"CDAECKPT"
    version u32      currently 1
    nlayers u32
    manifest, per layer:
        kind    u16 length + that many UTF-8 bytes
        nparams u32
        per parameter: ndim u32, then each dimension as u32
    data: raw float64 little-endian blocks, parameters in manifest order

Round-trips are bit-exact: loading restores the same doubles that were saved.
"""

from __future__ import annotations

import struct

import numpy as np

from ..errors import IoError
from .layers import Conv2D, MaxPool2x2, ReLU, Sequential, Sigmoid, UpsampleNearest2x2

MAGIC = b"CDAECKPT"
VERSION = 1

_STATELESS = {
    "relu": ReLU,
    "sigmoid": Sigmoid,
    "maxpool2x2": MaxPool2x2,
    "upsample_nearest2x2": UpsampleNearest2x2,
}


def save(model: Sequential, path) -> None:
    parts = [MAGIC, struct.pack("<II", VERSION, len(model.layers))]
    blocks = []
    for layer in model.layers:
        kind = layer.kind.encode("utf-8")
        parts.append(struct.pack("<H", len(kind)) + kind)
        params = layer.params()
        parts.append(struct.pack("<I", len(params)))
        for p in params:
            parts.append(struct.pack("<I", p.ndim))
            parts.append(struct.pack(f"<{p.ndim}I", *p.shape))
            blocks.append(np.ascontiguousarray(p, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))
        for block in blocks:
            fh.write(block)


class _Reader:
    def __init__(self, raw: bytes):
        self.raw = raw
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise IoError("truncated checkpoint")
        chunk = self.raw[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load(path) -> Sequential:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read checkpoint: {exc}") from exc
    r = _Reader(raw)
    if r.take(len(MAGIC)) != MAGIC:
        raise IoError("not a checkpoint file (bad magic)")
    version, nlayers = r.unpack("<II")
    if version != VERSION:
        raise IoError(f"unsupported checkpoint version {version}")

    manifest = []
    for _ in range(nlayers):
        (klen,) = r.unpack("<H")
        kind = r.take(klen).decode("utf-8")
        (nparams,) = r.unpack("<I")
        shapes = []
        for _ in range(nparams):
            (ndim,) = r.unpack("<I")
            shapes.append(tuple(r.unpack(f"<{ndim}I")))
        manifest.append((kind, shapes))

    layers = []
    arrays = []
    for kind, shapes in manifest:
        if kind == "conv2d":
            if len(shapes) != 2 or len(shapes[0]) != 4:
                raise IoError(f"malformed conv2d manifest entry: {shapes}")
            out_ch, in_ch, k, _ = shapes[0]
            layer = Conv2D(in_ch, out_ch, k)
        elif kind in _STATELESS:
            if shapes:
                raise IoError(f"{kind} should carry no parameters")
            layer = _STATELESS[kind]()
        else:
            raise IoError(f"unknown layer kind {kind!r}")
        layers.append(layer)
        for shape, param in zip(shapes, layer.params()):
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(r.take(count * 8), dtype="<f8").reshape(shape)
            arrays.append((param, data))
    if r.pos != len(raw):
        raise IoError("trailing bytes after checkpoint payload")
    for param, data in arrays:
        param[...] = data
    return Sequential(layers)
