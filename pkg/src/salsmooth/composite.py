"""Spatially variable smoothing by compositing uniformly blurred copies."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .imagery import ImageBuffer
from .kernels import DEFAULT_BANK, KernelBank, KernelSpec, convolve_uniform, kernel_width_for_saliency
from .masks import SaliencyMask


@dataclass(frozen=True, eq=False)
class CompositePlan:
    """Sorted unique kernel widths and one boolean selector per width.

    Selectors are mutually exclusive and cover every pixel.
    """

    kernel_widths: tuple[int, ...]
    binary_masks: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return len(self.kernel_widths)

    def width_for(self, width: int) -> np.ndarray:
        return self.binary_masks[self.kernel_widths.index(width)]


def per_pixel_width_map(mask: SaliencyMask, bank: KernelBank = DEFAULT_BANK) -> np.ndarray:
    """Integer raster of the kernel width chosen for each pixel."""
    out = np.empty(mask.levels.shape, dtype=np.int64)
    for level in mask.level_set:
        out[mask.levels == level] = kernel_width_for_saliency(level, bank)
    return out


def plan_composite(mask: SaliencyMask, bank: KernelBank = DEFAULT_BANK) -> CompositePlan:
    """Group saliency levels by mapped width; levels sharing a width share a selector."""
    if mask.levels.size == 0:
        raise ValueError("empty mask")
    widths = per_pixel_width_map(mask, bank)
    unique = tuple(int(k) for k in np.unique(widths))
    selectors = []
    for k in unique:
        sel = widths == k
        sel.setflags(write=False)
        selectors.append(sel)
    return CompositePlan(unique, tuple(selectors))


def composite_smooth(
    img: ImageBuffer,
    mask: SaliencyMask,
    bank: KernelBank = DEFAULT_BANK,
    sigma_rule=None,
    workers: int = 1,
) -> ImageBuffer:
    """Blur the whole image once per distinct width, then gather per pixel.

    Pixels mapped to width 1 keep their original samples. The result does not
    depend on ``workers``.
    """
    if (mask.width, mask.height) != (img.width, img.height):
        raise ValueError(
            f"mask is {mask.width}x{mask.height} but image is {img.width}x{img.height}; "
            "resample the mask first"
        )
    plan = plan_composite(mask, bank)
    out = img.pixels.copy()

    def blur(width: int) -> np.ndarray:
        return convolve_uniform(img, KernelSpec.for_width(width, sigma_rule)).pixels

    smoothed = [k for k in plan.kernel_widths if k > 1]
    if workers > 1 and len(smoothed) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for k, blurred in zip(smoothed, pool.map(blur, smoothed)):
                sel = plan.width_for(k)
                out[sel] = blurred[sel]
    else:
        for k in smoothed:
            sel = plan.width_for(k)
            out[sel] = blur(k)[sel]
    return ImageBuffer(out)
