"""Distortion and storage-rate metrics."""

from __future__ import annotations

import numpy as np

from ..imagery import ImageBuffer
from ..masks import SaliencyMask


def compute_mse(a: ImageBuffer, b: ImageBuffer, region=None) -> float:
    """Mean squared sample difference in 8-bit units.

    ``region`` is an optional boolean (height, width) raster; the mean runs
    over its pixels and all channels.
    """
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"shape mismatch: {a.pixels.shape} vs {b.pixels.shape}")
    diff = a.pixels.astype(np.int64) - b.pixels.astype(np.int64)
    sq = diff * diff
    if region is None:
        return float(sq.mean())
    region = np.asarray(region, dtype=bool)
    if region.shape != a.pixels.shape[:2]:
        raise ValueError(f"region shape {region.shape} does not match image {a.pixels.shape[:2]}")
    if not region.any():
        raise ValueError("empty region")
    return float(sq[region].mean())


def mse_per_level(a: ImageBuffer, b: ImageBuffer, mask: SaliencyMask) -> dict[float, float]:
    return {level: compute_mse(a, b, mask.levels == level) for level in mask.level_set}


def level_fractions(mask: SaliencyMask) -> dict[float, float]:
    total = mask.levels.size
    return {level: n / total for level, n in mask.level_counts().items()}


def compute_bpp(file_bytes: int, w: int, h: int) -> float:
    if w <= 0 or h <= 0:
        raise ValueError("image area must be positive")
    if file_bytes <= 0:
        raise ValueError("file size must be positive")
    return 8.0 * file_bytes / (w * h)


def rate_reduction_pct(bpp_original: float, bpp_processed: float) -> float:
    if bpp_original <= 0:
        raise ValueError("original bpp must be positive")
    return 100.0 * (1.0 - bpp_processed / bpp_original)
