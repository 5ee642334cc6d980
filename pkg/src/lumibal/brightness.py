"""Brightness metrics on face-skin histograms.

Covers grayscale conversion, masked histogram extraction, the median
brightness value (bv) of a distribution, the absolute brightness difference
(bvd) of a mated pair, and the overexposure fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .datamodel import BrightnessDistribution, ImageRecord, MatedPair

__all__ = [
    "MaskedCrop",
    "grayscale_luma",
    "luma_image",
    "histogram_from_masked",
    "brightness_value",
    "bv_of",
    "bvd",
    "overexposure_fraction",
]

# ITU-R BT.601 luma weights. round-half-up, not banker's rounding, so the
# secondary adapter can reproduce the conversion bit-exactly in any language.
_LUMA_R = 0.299
_LUMA_G = 0.587
_LUMA_B = 0.114


def grayscale_luma(r: int, g: int, b: int) -> int:
    """Convert one RGB pixel to a grayscale value in 0..255."""
    for ch in (r, g, b):
        if not (0 <= ch <= 255):
            raise ValueError(f"channel value {ch} outside 0..255")
    y = _LUMA_R * r + _LUMA_G * g + _LUMA_B * b
    return min(255, int(np.floor(y + 0.5)))


def luma_image(rgb: np.ndarray) -> np.ndarray:
    """Vectorized :func:`grayscale_luma` over an (..., 3) uint8 array."""
    rgb = np.asarray(rgb)
    if rgb.shape[-1] != 3:
        raise ValueError("expected trailing RGB axis of size 3")
    y = (
        _LUMA_R * rgb[..., 0].astype(np.float64)
        + _LUMA_G * rgb[..., 1]
        + _LUMA_B * rgb[..., 2]
    )
    return np.minimum(np.floor(y + 0.5), 255).astype(np.uint8)


@dataclass(frozen=True)
class MaskedCrop:
    """A grayscale face crop plus the boolean mask of its skin pixels."""

    gray: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gray)
        m = np.asarray(self.mask, dtype=bool)
        if g.ndim != 2:
            raise ValueError("gray must be a 2-D array")
        if m.shape != g.shape:
            raise ValueError(f"mask shape {m.shape} does not match gray shape {g.shape}")
        if np.any((g < 0) | (g > 255)):
            raise ValueError("gray value outside 0..255")
        object.__setattr__(self, "gray", g)
        object.__setattr__(self, "mask", m)

    @property
    def width(self) -> int:
        return self.gray.shape[1]

    @property
    def height(self) -> int:
        return self.gray.shape[0]

    @classmethod
    def from_rgb(cls, rgb: np.ndarray, mask: np.ndarray) -> "MaskedCrop":
        return cls(gray=luma_image(rgb), mask=mask)


def histogram_from_masked(crop: MaskedCrop) -> BrightnessDistribution:
    """Histogram the masked pixels of ``crop``."""
    values = np.asarray(crop.gray)[crop.mask]
    if values.size == 0:
        raise ValueError("empty face region")
    return BrightnessDistribution(np.bincount(values.astype(np.int64).ravel(), minlength=256))


def brightness_value(dist: BrightnessDistribution) -> float:
    """Median of the pixel-value multiset; a multiple of 0.5.

    For an even pixel count the two middle order statistics are averaged,
    which is what gives half-integer values.
    """
    counts = dist.counts
    n = int(counts.sum())
    csum = np.cumsum(counts)
    # 0-based ranks of the two middle elements (equal when n is odd)
    lo_rank = (n - 1) // 2
    hi_rank = n // 2
    lo = int(np.searchsorted(csum, lo_rank + 1))
    hi = int(np.searchsorted(csum, hi_rank + 1))
    return (lo + hi) / 2.0


def bv_of(rec: ImageRecord) -> float:
    """The record's annotated bv, computed from its distribution if unset."""
    if rec.bv is not None:
        return rec.bv
    return brightness_value(rec.dist)


def bvd(pair: MatedPair, images: Mapping[str, ImageRecord]) -> float:
    """Absolute brightness difference between a pair's two images."""
    return abs(bv_of(images[pair.img_x]) - bv_of(images[pair.img_y]))


def overexposure_fraction(dist: BrightnessDistribution, threshold: int = 240) -> float:
    """Fraction of pixels with value strictly above ``threshold``."""
    if not (0 <= threshold <= 255):
        raise ValueError(f"threshold {threshold} outside 0..255")
    counts = dist.counts
    return float(counts[threshold + 1 :].sum() / counts.sum())
