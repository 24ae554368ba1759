"""Single-step fast gradient sign attack in the 8-bit pixel domain.

The step is taken on integer pixel levels, so the L-infinity bound holds
exactly after quantisation and survives PNG round-trips.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffnet import Network, grad_input
from .errors import DimensionError
from .image import Image8


@dataclass(frozen=True)
class AttackConfig:
    epsilon: int = 8  # pixel levels on the 0-255 scale

    def __post_init__(self):
        if isinstance(self.epsilon, bool) or not isinstance(self.epsilon, (int, np.integer)):
            raise ValueError(f"epsilon must be an integer pixel level, got {self.epsilon!r}")
        if not 0 <= self.epsilon <= 255:
            raise ValueError(f"epsilon must be in [0, 255], got {self.epsilon}")


def gradient_sign(net: Network, img: Image8, y: int) -> np.ndarray:
    """sign of dLoss/dx at x = img / 255, as int16 in {-1, 0, 1}."""
    if img.size != net.input_dim:
        raise DimensionError(f"image has {img.size} values, network expects {net.input_dim}")
    return np.sign(grad_input(net, img.to_unit(), y)).astype(np.int16)


def fgsm(net: Network, img: Image8, y: int, cfg: AttackConfig) -> Image8:
    """Move every pixel ``epsilon`` levels along the loss-gradient sign, then clamp."""
    signs = gradient_sign(net, img, y)
    if cfg.epsilon == 0:
        return Image8(img.pixels.copy())
    adv = img.flat().astype(np.int16) + cfg.epsilon * signs
    adv = np.clip(adv, 0, 255).astype(np.uint8)
    return Image8(adv.reshape(img.shape))


def linf_distance(a: Image8, b: Image8) -> int:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    diff = np.abs(a.pixels.astype(np.int16) - b.pixels.astype(np.int16))
    return int(diff.max())
