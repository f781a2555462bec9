"""Saliency masks: synthetic generators, box masks, resampling, serialization."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .kernels import DEFAULT_BANK, KernelBank, kernel_width_for_saliency
from .noise import perlin_noise

MAX_LEVELS = 16
GRID_LEVELS = (0.0, 0.33, 0.66, 1.0)
PERLIN_LEVELS = (0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True, eq=False)
class SaliencyMask:
    """Per-pixel normalized saliency, ``levels`` has shape (height, width)."""

    levels: np.ndarray
    kind: str = "custom"

    def __post_init__(self):
        arr = np.array(self.levels, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"mask must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise ValueError("saliency values must lie in [0, 1]")
        n = len(np.unique(arr))
        if n > MAX_LEVELS:
            raise ValueError(f"mask has {n} distinct levels; at most {MAX_LEVELS} allowed")
        arr.setflags(write=False)
        object.__setattr__(self, "levels", arr)

    @property
    def width(self) -> int:
        return self.levels.shape[1]

    @property
    def height(self) -> int:
        return self.levels.shape[0]

    @property
    def level_set(self) -> tuple[float, ...]:
        return tuple(float(v) for v in np.unique(self.levels))

    def level_counts(self) -> dict[float, int]:
        values, counts = np.unique(self.levels, return_counts=True)
        return {float(v): int(c) for v, c in zip(values, counts)}

    def __eq__(self, other):
        if not isinstance(other, SaliencyMask):
            return NotImplemented
        return self.levels.shape == other.levels.shape and bool(
            np.array_equal(self.levels, other.levels)
        )

    def __repr__(self):
        return f"SaliencyMask({self.kind}, {self.width}x{self.height}, levels={self.level_set})"


@dataclass(frozen=True)
class BoxAnnotation:
    """Pixel boxes ``(x, y, w, h)``; each side grows by ``dilation`` times the box size."""

    boxes: tuple[tuple[float, float, float, float], ...] = ()
    dilation: float = 0.5

    def __post_init__(self):
        if self.dilation < 0:
            raise ValueError("dilation must be >= 0")
        boxes = tuple(tuple(float(v) for v in b) for b in self.boxes)
        for b in boxes:
            if len(b) != 4 or b[2] < 0 or b[3] < 0:
                raise ValueError(f"invalid box {b}; expected (x, y, w, h) with w, h >= 0")
        object.__setattr__(self, "boxes", boxes)

    def dilated(self, width: int, height: int):
        """Yield integer ``(x0, y0, x1, y1)`` half-open rectangles clamped to the image."""
        for x, y, w, h in self.boxes:
            gx, gy = self.dilation * w, self.dilation * h
            x0 = max(0, math.floor(x - gx))
            y0 = max(0, math.floor(y - gy))
            x1 = min(width, math.ceil(x + w + gx))
            y1 = min(height, math.ceil(y + h + gy))
            if x1 > x0 and y1 > y0:
                yield x0, y0, x1, y1


def _check_dims(w: int, h: int, minimum: int, kind: str):
    if w < minimum or h < minimum:
        raise ValueError(f"{kind} mask needs width and height >= {minimum}, got {w}x{h}")


def make_half_mask(w: int, h: int) -> SaliencyMask:
    """Left ceil(w/2) columns fully salient, the rest zero."""
    _check_dims(w, h, 2, "half")
    levels = np.zeros((h, w))
    levels[:, : (w + 1) // 2] = 1.0
    return SaliencyMask(levels, kind="half")


def make_grid_mask(w: int, h: int, levels=GRID_LEVELS) -> SaliencyMask:
    """4x4 cells, cell (r, c) at ``levels[(r + c) % 4]``."""
    _check_dims(w, h, 4, "grid")
    rows = (np.arange(h) * 4) // h
    cols = (np.arange(w) * 4) // w
    index = (rows[:, None] + cols[None, :]) % 4
    return SaliencyMask(np.asarray(levels, dtype=np.float64)[index], kind="grid")


def make_perlin_mask(
    w: int,
    h: int,
    seed: int,
    octaves: int = 3,
    persistence: float = 0.5,
    lacunarity: float = 2.0,
    base_cells: int = 8,
) -> SaliencyMask:
    """Perlin noise scaled to 8 bits and cut to its 2 most significant bits.

    Bin ``i`` (sample value ``i * 64``) becomes saliency ``(i + 1) / 4``.
    """
    _check_dims(w, h, 8, "perlin")
    noise = perlin_noise(w, h, seed, octaves, persistence, lacunarity, base_cells)
    lo, hi = noise.min(), noise.max()
    if hi > lo:
        scaled = np.floor((noise - lo) / (hi - lo) * 255.0).astype(np.uint8)
    else:
        scaled = np.zeros((h, w), dtype=np.uint8)
    bins = scaled >> 6
    return SaliencyMask((bins + 1) / 4.0, kind="perlin")


def make_box_mask(
    w: int,
    h: int,
    ann: BoxAnnotation,
    inside: float = 0.8,
    outside: float = 0.0,
) -> SaliencyMask:
    """Union of dilated boxes at ``inside``, everything else at ``outside``."""
    if w < 1 or h < 1:
        raise ValueError("mask dimensions must be positive")
    levels = np.full((h, w), float(outside))
    for x0, y0, x1, y1 in ann.dilated(w, h):
        levels[y0:y1, x0:x1] = inside
    return SaliencyMask(levels, kind="box")


def resample_mask(mask: SaliencyMask, w: int, h: int) -> SaliencyMask:
    """Nearest-neighbour resize; never introduces new levels."""
    if w < 1 or h < 1:
        raise ValueError("target dimensions must be positive")
    if (w, h) == (mask.width, mask.height):
        return mask
    rows = ((np.arange(h) + 0.5) * mask.height / h).astype(int)
    cols = ((np.arange(w) + 0.5) * mask.width / w).astype(int)
    rows = np.minimum(rows, mask.height - 1)
    cols = np.minimum(cols, mask.width - 1)
    return SaliencyMask(mask.levels[np.ix_(rows, cols)], kind=mask.kind)


def crop_mask(mask: SaliencyMask, x: int, y: int, w: int, h: int) -> SaliencyMask:
    return SaliencyMask(mask.levels[y : y + h, x : x + w], kind=mask.kind)


def width_distribution(mask: SaliencyMask, bank: KernelBank = DEFAULT_BANK) -> dict[int, float]:
    """Fraction of pixels mapped to each kernel width, ascending by width."""
    counts: Counter[int] = Counter()
    for level, n in mask.level_counts().items():
        counts[kernel_width_for_saliency(level, bank)] += n
    total = mask.levels.size
    return {k: counts[k] / total for k in sorted(counts)}


def effective_width_from_distribution(distribution) -> float:
    """Weighted mean of widths given ``{width: fraction}`` (fractions sum to 1)."""
    items = dict(distribution)
    total = sum(items.values())
    if not math.isclose(total, 1.0, abs_tol=1e-9):
        raise ValueError(f"fractions must sum to 1, got {total}")
    return sum(k * w for k, w in items.items())


def effective_kernel_width(mask: SaliencyMask, bank: KernelBank = DEFAULT_BANK) -> float:
    """Pixel-area weighted mean of the kernel widths the mask maps to."""
    counts: Counter[int] = Counter()
    for level, n in mask.level_counts().items():
        counts[kernel_width_for_saliency(level, bank)] += n
    return sum(k * n for k, n in counts.items()) / mask.levels.size


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_mask(mask: SaliencyMask, path) -> Path:
    """Write an 8-bit grayscale PNG (value ``round(255 * s)``) plus a JSON sidecar."""
    path = Path(path)
    gray = np.floor(mask.levels * 255.0 + 0.5).astype(np.uint8)
    codes = {int(np.floor(s * 255.0 + 0.5)) for s in mask.level_set}
    if len(codes) != len(mask.level_set):
        raise ValueError("mask levels collide after 8-bit quantization")
    Image.fromarray(gray).save(path, format="PNG")
    sidecar = sidecar_path(path)
    sidecar.write_text(
        json.dumps(
            {"kind": mask.kind, "width": mask.width, "height": mask.height,
             "level_set": list(mask.level_set)},
            indent=2,
        )
    )
    return sidecar


def load_mask(path) -> SaliencyMask:
    """Read a mask written by :func:`save_mask`.

    Without a sidecar the gray value ``v`` is read as saliency ``v / 255``.
    """
    path = Path(path)
    with Image.open(path) as im:
        if im.mode != "L":
            raise ValueError(f"{path}: masks must be 8-bit grayscale, got mode {im.mode}")
        gray = np.asarray(im)
    sidecar = sidecar_path(path)
    if not sidecar.exists():
        return SaliencyMask(gray / 255.0, kind="file")
    meta = json.loads(sidecar.read_text())
    lookup = np.full(256, np.nan)
    for s in meta["level_set"]:
        lookup[int(np.floor(s * 255.0 + 0.5))] = s
    levels = lookup[gray]
    if np.isnan(levels).any():
        raise ValueError(f"{path}: gray values not listed in sidecar level_set")
    return SaliencyMask(levels, kind=meta.get("kind", "file"))
