"""Binary checkpoint format for :class:`~advstego.diffnet.Network`.

Layout (little-endian)::

    b"AGNT" | u16 version=1 | u16 layer_count
    layer_count x (u32 in_dim | u32 out_dim | u8 activation)
    all weight matrices in layer order, row-major f64
    all bias vectors in layer order, f64
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .diffnet import Layer, Network
from .errors import (
    CheckpointError,
    CheckpointMagicError,
    CheckpointShapeError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    ModelError,
)

MAGIC = b"AGNT"
VERSION = 1
ACTIVATION_CODES = {"identity": 0, "relu": 1}
_CODE_TO_ACTIVATION = {v: k for k, v in ACTIVATION_CODES.items()}

_HEADER = struct.Struct("<4sHH")
_LAYER = struct.Struct("<IIB")


def dumps(net: Network) -> bytes:
    parts = [_HEADER.pack(MAGIC, VERSION, len(net.layers))]
    for layer in net.layers:
        parts.append(_LAYER.pack(layer.input_dim, layer.output_dim, ACTIVATION_CODES[layer.activation]))
    for layer in net.layers:
        parts.append(layer.weights.astype("<f8").tobytes())
    for layer in net.layers:
        parts.append(layer.bias.astype("<f8").tobytes())
    return b"".join(parts)


def loads(data: bytes) -> Network:
    if len(data) < 4:
        raise CheckpointTruncatedError("checkpoint shorter than its magic")
    if data[:4] != MAGIC:
        raise CheckpointMagicError(f"bad checkpoint magic {data[:4]!r}")
    if len(data) < _HEADER.size:
        raise CheckpointTruncatedError("checkpoint header truncated")
    _, version, n_layers = _HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise CheckpointVersionError(f"unsupported checkpoint version {version}")
    if n_layers == 0:
        raise CheckpointShapeError("checkpoint declares zero layers")

    offset = _HEADER.size
    specs = []
    for _ in range(n_layers):
        if len(data) < offset + _LAYER.size:
            raise CheckpointTruncatedError("layer table truncated")
        in_dim, out_dim, code = _LAYER.unpack_from(data, offset)
        offset += _LAYER.size
        if in_dim == 0 or out_dim == 0:
            raise CheckpointShapeError("layer with zero dimension")
        if code not in _CODE_TO_ACTIVATION:
            raise CheckpointShapeError(f"unknown activation code {code}")
        specs.append((in_dim, out_dim, _CODE_TO_ACTIVATION[code]))

    for (_, out_a, _), (in_b, _, _) in zip(specs, specs[1:]):
        if out_a != in_b:
            raise CheckpointShapeError(f"layer chain broken: {out_a} -> {in_b}")

    n_values = sum(i * o + o for i, o, _ in specs)
    expected = offset + 8 * n_values
    if len(data) < expected:
        raise CheckpointTruncatedError(f"expected {expected} bytes, found {len(data)}")
    if len(data) > expected:
        raise CheckpointShapeError(f"{len(data) - expected} trailing bytes after parameters")

    weights = []
    for in_dim, out_dim, _ in specs:
        w = np.frombuffer(data, dtype="<f8", count=in_dim * out_dim, offset=offset)
        weights.append(w.reshape(out_dim, in_dim).astype(np.float64))
        offset += 8 * in_dim * out_dim
    layers = []
    for (in_dim, out_dim, act), w in zip(specs, weights):
        b = np.frombuffer(data, dtype="<f8", count=out_dim, offset=offset).astype(np.float64)
        offset += 8 * out_dim
        layers.append(Layer(w, b, act))

    if not all(np.isfinite(l.weights).all() and np.isfinite(l.bias).all() for l in layers):
        raise CheckpointError("checkpoint contains non-finite parameters")
    try:
        return Network(layers)
    except ModelError as exc:
        raise CheckpointShapeError(str(exc)) from exc


def save_checkpoint(net: Network, path: str | os.PathLike) -> None:
    with open(path, "wb") as f:
        f.write(dumps(net))


def load_checkpoint(path: str | os.PathLike) -> Network:
    with open(path, "rb") as f:
        return loads(f.read())
