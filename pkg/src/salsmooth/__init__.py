"""Saliency-driven variable-rate smoothing of imagery, with a rate/distortion bench."""

from .composite import CompositePlan, composite_smooth, per_pixel_width_map, plan_composite
from .imagery import ImageBuffer, UnsupportedImageError, ingest_directory, load_image, save_image
from .kernels import (
    DEFAULT_BANK,
    KernelBank,
    KernelSpec,
    build_gaussian,
    convolve_uniform,
    kernel_width_for_saliency,
)
from .masks import (
    BoxAnnotation,
    SaliencyMask,
    effective_kernel_width,
    make_box_mask,
    make_grid_mask,
    make_half_mask,
    make_perlin_mask,
    resample_mask,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_BANK",
    "BoxAnnotation",
    "CompositePlan",
    "ImageBuffer",
    "KernelBank",
    "KernelSpec",
    "SaliencyMask",
    "UnsupportedImageError",
    "build_gaussian",
    "composite_smooth",
    "convolve_uniform",
    "effective_kernel_width",
    "ingest_directory",
    "kernel_width_for_saliency",
    "load_image",
    "make_box_mask",
    "make_grid_mask",
    "make_half_mask",
    "make_perlin_mask",
    "per_pixel_width_map",
    "plan_composite",
    "resample_mask",
    "save_image",
]
