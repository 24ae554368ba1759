"""LSB payload channel with a self-validating frame.

Frame bytes: ``b"APLD"`` | version ``0x01`` | u32 LE length | u32 LE CRC-32 of
the payload | payload. The frame bit stream (MSB of each byte first) is
written into the lowest ``bits_per_channel`` bits of each pixel byte in scan
order; within a pixel the first stream bit lands in the highest of those bits.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    ChecksumError,
    FrameLengthError,
    FrameVersionError,
    NoMagicError,
)
from .image import Image8

MAGIC = b"APLD"
VERSION = 1
HEADER_SIZE = 13
_HEADER = struct.Struct("<4sBII")


@dataclass(frozen=True)
class StegoConfig:
    bits_per_channel: int = 1

    def __post_init__(self):
        if not 1 <= self.bits_per_channel <= 4:
            raise ValueError(f"bits_per_channel must be in [1, 4], got {self.bits_per_channel}")


def frame(payload: bytes) -> bytes:
    payload = bytes(payload)
    return _HEADER.pack(MAGIC, VERSION, len(payload), zlib.crc32(payload)) + payload


def capacity(img: Image8, cfg: StegoConfig = StegoConfig()) -> int:
    """Largest payload, in bytes, that fits alongside the frame header."""
    return max(img.size * cfg.bits_per_channel // 8 - HEADER_SIZE, 0)


def inject(img: Image8, payload: bytes, cfg: StegoConfig = StegoConfig()) -> Image8:
    cap = capacity(img, cfg)
    if img.size * cfg.bits_per_channel // 8 < HEADER_SIZE:
        raise CapacityError("image too small to hold the frame header")
    if len(payload) > cap:
        raise CapacityError(f"payload of {len(payload)} bytes exceeds capacity {cap}")
    k = cfg.bits_per_channel
    stream = np.unpackbits(np.frombuffer(frame(payload), dtype=np.uint8))
    n_carriers = -(-len(stream) // k)
    carriers = img.flat()[:n_carriers]

    shifts = np.arange(k - 1, -1, -1, dtype=np.uint8)
    # Start from the carriers' own low bits so a partial last group keeps them.
    groups = (carriers[:, None] >> shifts) & 1
    groups.reshape(-1)[: len(stream)] = stream
    low = (groups << shifts).sum(axis=1).astype(np.uint8)

    mask = np.uint8((1 << k) - 1)
    out = img.flat().copy()
    out[:n_carriers] = (carriers & ~mask) | low
    return Image8(out.reshape(img.shape))


def _read_stream(img: Image8, k: int) -> bytes:
    shifts = np.arange(k - 1, -1, -1, dtype=np.uint8)
    bits = ((img.flat()[:, None] >> shifts) & 1).reshape(-1)
    bits = bits[: len(bits) // 8 * 8]
    return np.packbits(bits).tobytes()


def extract(img: Image8, cfg: StegoConfig = StegoConfig()) -> bytes:
    """Recover the framed payload or raise a :class:`StegoError` subclass."""
    stream = _read_stream(img, cfg.bits_per_channel)
    if len(stream) < HEADER_SIZE or stream[:4] != MAGIC:
        raise NoMagicError("no payload frame found")
    _, version, length, crc = _HEADER.unpack_from(stream, 0)
    if version != VERSION:
        raise FrameVersionError(f"unsupported frame version {version}")
    if length > capacity(img, cfg):
        raise FrameLengthError(f"frame length {length} exceeds capacity {capacity(img, cfg)}")
    payload = stream[HEADER_SIZE:HEADER_SIZE + length]
    if zlib.crc32(payload) != crc:
        raise ChecksumError("payload checksum mismatch")
    return payload
