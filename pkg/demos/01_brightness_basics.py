"""Brightness primitives on a toy image.

Walk through the low-level chain: RGB to grayscale, masked histogram,
median brightness value, pair difference, and the overexposure fraction.
"""

import numpy as np

from lumibal.brightness import (
    MaskedCrop,
    brightness_value,
    grayscale_luma,
    histogram_from_masked,
    luma_image,
    overexposure_fraction,
)

rng = np.random.default_rng(7)

# single pixels first: luma is a weighted channel sum, rounded half-up
print("pure red  ->", grayscale_luma(255, 0, 0))
print("pure green->", grayscale_luma(0, 255, 0))
print("pure blue ->", grayscale_luma(0, 0, 255))
print("white     ->", grayscale_luma(255, 255, 255))

# a 32x32 synthetic face crop: skin-ish center, dark background
rgb = np.zeros((32, 32, 3), dtype=np.uint8)
rgb[..., 0] = 40
yy, xx = np.mgrid[0:32, 0:32]
face = (yy - 16) ** 2 + (xx - 16) ** 2 < 12**2
skin = rng.normal(180, 12, size=(32, 32, 3))
rgb[face] = np.clip(skin, 0, 255).astype(np.uint8)[face]

gray = luma_image(rgb)
print("\ngray shape:", gray.shape, "dtype:", gray.dtype)

# the mask restricts the histogram to face-skin pixels only
crop = MaskedCrop(gray=gray, mask=face)
hist = histogram_from_masked(crop)
print("masked pixels:", hist.total, "of", gray.size)

bv = brightness_value(hist)
print("brightness value (median, may end in .5):", bv)

# a second image of the same subject, a bit brighter; their absolute
# difference in brightness value is the pair's BVD
rgb2 = np.clip(rgb.astype(np.int16) + 14, 0, 255).astype(np.uint8)
hist2 = histogram_from_masked(MaskedCrop(gray=luma_image(rgb2), mask=face))
print("pair BVD:", abs(brightness_value(hist2) - bv))

# overexposure counts pixels strictly above the threshold
blown = rgb.copy()
blown[10:16, 10:22] = 251
hist3 = histogram_from_masked(MaskedCrop(gray=luma_image(blown), mask=face))
print("overexposure fraction:", round(overexposure_fraction(hist3), 4))
