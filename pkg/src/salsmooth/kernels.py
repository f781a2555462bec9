"""Gaussian smoothing kernels and the saliency to kernel-width mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .imagery import ImageBuffer

DEFAULT_ADMISSIBLE_K = (3, 5, 7, 9, 11, 13, 15, 17)


def default_sigma(width: int) -> float:
    """Common spread convention tying sigma to the kernel extent."""
    return 0.3 * ((width - 1) * 0.5 - 1) + 0.8


SIGMA_RULES: dict[str, Callable[[int], float]] = {
    "default": default_sigma,
    "width_over_6": lambda width: width / 6.0,
    "width_over_4": lambda width: width / 4.0,
}


def resolve_sigma_rule(rule) -> Callable[[int], float]:
    """Accept a callable, a rule name, or ``"fixed:<sigma>"``."""
    if callable(rule):
        return rule
    if rule is None:
        return default_sigma
    if isinstance(rule, str) and rule.startswith("fixed:"):
        value = float(rule.split(":", 1)[1])
        if value <= 0:
            raise ValueError("fixed sigma must be positive")
        return lambda width: value
    try:
        return SIGMA_RULES[rule]
    except KeyError:
        raise ValueError(
            f"unknown sigma rule {rule!r}; choose from {sorted(SIGMA_RULES)} or 'fixed:<sigma>'"
        ) from None


@dataclass(frozen=True)
class KernelSpec:
    """Odd kernel width and the Gaussian standard deviation in pixels."""

    width: int
    sigma: float | None = None

    def __post_init__(self):
        if not isinstance(self.width, (int, np.integer)) or self.width < 1 or self.width % 2 == 0:
            raise ValueError(f"kernel width must be an odd integer >= 1, got {self.width!r}")
        object.__setattr__(self, "width", int(self.width))
        if self.sigma is None:
            object.__setattr__(self, "sigma", default_sigma(self.width))
        if self.width > 1 and not self.sigma > 0:
            raise ValueError(f"sigma must be positive for width {self.width}")

    @classmethod
    def for_width(cls, width: int, sigma_rule=None) -> "KernelSpec":
        return cls(width, resolve_sigma_rule(sigma_rule)(width))

    @property
    def radius(self) -> int:
        return (self.width - 1) // 2


@dataclass(frozen=True)
class KernelBank:
    """Admissible base kernel sizes; only the cardinality enters the mapping."""

    admissible_k: tuple[int, ...] = DEFAULT_ADMISSIBLE_K

    def __post_init__(self):
        ks = tuple(int(k) for k in self.admissible_k)
        if not ks:
            raise ValueError("admissible_k must not be empty")
        if any(k % 2 == 0 for k in ks):
            raise ValueError("admissible kernel sizes must be odd")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValueError("admissible kernel sizes must be strictly increasing")
        object.__setattr__(self, "admissible_k", ks)

    @property
    def cardinality(self) -> int:
        return len(self.admissible_k)

    @property
    def max_width(self) -> int:
        return 2 * self.cardinality + 1

    def widths(self) -> tuple[int, ...]:
        """Every width the mapping can produce, ascending."""
        return tuple(range(1, self.max_width + 1, 2))


DEFAULT_BANK = KernelBank()


def kernel_width_for_saliency(s: float, bank: KernelBank = DEFAULT_BANK) -> int:
    """Map a normalized saliency level to an odd kernel width.

    ``K(s) = 2 * floor((1 - s) * |k|) + 1`` so ``s = 1`` keeps the pixel
    untouched (width 1) and ``s = 0`` gets the widest kernel.
    """
    s = float(s)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"saliency must lie in [0, 1], got {s}")
    return 2 * math.floor((1.0 - s) * bank.cardinality) + 1


def gaussian_1d(spec: KernelSpec) -> np.ndarray:
    """Normalized sampled 1-D Gaussian; its outer square is the 2-D kernel."""
    if spec.width == 1:
        return np.ones(1)
    x = np.arange(-spec.radius, spec.radius + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * spec.sigma**2))
    return g / g.sum()


def build_gaussian(spec: KernelSpec) -> np.ndarray:
    """Square ``width x width`` kernel of normalized Gaussian weights."""
    g = gaussian_1d(spec)
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def _correlate_axis(a: np.ndarray, weights: np.ndarray, axis: int) -> np.ndarray:
    r = (len(weights) - 1) // 2
    pad = [(0, 0)] * a.ndim
    pad[axis] = (r, r)
    padded = np.pad(a, pad, mode="reflect")
    n = a.shape[axis]
    out = np.zeros_like(a, dtype=np.float64)
    for i, w in enumerate(weights):
        out += w * np.take(padded, np.arange(i, i + n), axis=axis)
    return out


def round_to_uint8(values: np.ndarray) -> np.ndarray:
    """Round half away from zero and clamp to the 8-bit range."""
    rounded = np.sign(values) * np.floor(np.abs(values) + 0.5)
    return np.clip(rounded, 0, 255).astype(np.uint8)


def convolve_uniform(img: ImageBuffer, spec: KernelSpec) -> ImageBuffer:
    """Smooth every channel with the same Gaussian.

    Separable row/column passes in float64 with mirror borders (edge sample
    not repeated); rounding happens once at the end.
    """
    if spec.width == 1:
        return ImageBuffer(img.pixels)
    g = gaussian_1d(spec)
    data = img.pixels.astype(np.float64)
    data = _correlate_axis(data, g, axis=1)
    data = _correlate_axis(data, g, axis=0)
    return ImageBuffer(round_to_uint8(data))
