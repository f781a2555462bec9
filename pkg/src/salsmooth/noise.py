"""Gradient-lattice (Perlin) noise sampled on a pixel grid."""

from __future__ import annotations

import numpy as np


def _fade(t):
    return t * t * t * (t * (t * 6 - 15) + 10)


def _octave(width: int, height: int, cells_x: int, cells_y: int, rng: np.random.Generator):
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(cells_y + 1, cells_x + 1))
    gx, gy = np.cos(angles), np.sin(angles)

    # pixel centres in lattice coordinates
    u = (np.arange(width) + 0.5) * cells_x / width
    v = (np.arange(height) + 0.5) * cells_y / height
    x, y = np.meshgrid(u, v)
    x0 = np.minimum(np.floor(x).astype(int), cells_x - 1)
    y0 = np.minimum(np.floor(y).astype(int), cells_y - 1)
    fx, fy = x - x0, y - y0

    def dot(ix, iy, dx, dy):
        return gx[iy, ix] * dx + gy[iy, ix] * dy

    n00 = dot(x0, y0, fx, fy)
    n10 = dot(x0 + 1, y0, fx - 1, fy)
    n01 = dot(x0, y0 + 1, fx, fy - 1)
    n11 = dot(x0 + 1, y0 + 1, fx - 1, fy - 1)
    sx, sy = _fade(fx), _fade(fy)
    top = n00 + sx * (n10 - n00)
    bottom = n01 + sx * (n11 - n01)
    return top + sy * (bottom - top)


def perlin_noise(
    width: int,
    height: int,
    seed: int,
    octaves: int = 3,
    persistence: float = 0.5,
    lacunarity: float = 2.0,
    base_cells: int = 8,
) -> np.ndarray:
    """Fractal Perlin noise of shape ``(height, width)``.

    Octave ``o`` uses ``base_cells * lacunarity**o`` lattice cells across
    each axis and amplitude ``persistence**o``. Gradients come from
    ``numpy.random.default_rng(seed)`` so output is reproducible.
    """
    if octaves < 1:
        raise ValueError("octaves must be >= 1")
    rng = np.random.default_rng(seed)
    total = np.zeros((height, width))
    amplitude = 1.0
    cells = float(base_cells)
    for _ in range(octaves):
        c = max(1, int(round(cells)))
        total += amplitude * _octave(width, height, c, c, rng)
        amplitude *= persistence
        cells *= lacunarity
    return total
