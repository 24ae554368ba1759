"""8-bit image container shared by the attack, stego and I/O modules."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError


class Image8:
    """Row-major, channel-interleaved 8-bit image.

    ``pixels`` is a ``(height, width, channels)`` uint8 array. Instances are
    treated as immutable: operations return new images.
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.asarray(pixels)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise DimensionError(f"expected HxWx1 or HxWx3 pixels, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError("image must have positive width and height")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255):
                raise DimensionError("pixel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        arr.flags.writeable = False
        self.pixels = arr

    @classmethod
    def from_bytes(cls, data: bytes, width: int, height: int, channels: int = 1) -> Image8:
        if len(data) != width * height * channels:
            raise DimensionError(
                f"{len(data)} bytes for a {width}x{height}x{channels} image"
            )
        arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width, channels)
        return cls(arr.copy())

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.pixels.shape

    @property
    def size(self) -> int:
        return self.pixels.size

    def to_bytes(self) -> bytes:
        return self.pixels.tobytes()

    def flat(self) -> np.ndarray:
        """Pixels as a flat uint8 vector in scan order."""
        return self.pixels.reshape(-1)

    def to_unit(self) -> np.ndarray:
        """Model input: flat float64 vector of value/255 in [0, 1]."""
        return self.flat().astype(np.float64) / 255.0

    def __eq__(self, other):
        if not isinstance(other, Image8):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.shape, self.to_bytes()))

    def __repr__(self):
        return f"Image8(width={self.width}, height={self.height}, channels={self.channels})"
