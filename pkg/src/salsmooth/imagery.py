"""Image buffers, lossless raster I/O and dataset ingestion."""

from __future__ import annotations

import io
import json
import logging
import os
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

logger = logging.getLogger(__name__)

SUPPORTED_SUFFIXES = (".png", ".tif", ".tiff", ".bmp", ".pgm", ".ppm", ".pnm")

_MODE_CHANNELS = {"L": 1, "RGB": 3}
_HIGH_DEPTH_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N", "F"}


class UnsupportedImageError(ValueError):
    """Source raster is not 8-bit grayscale or 8-bit RGB."""


@dataclass(frozen=True, eq=False)
class ImageBuffer:
    """Immutable H x W x C raster of 8-bit samples (C is 1 or 3).

    ``pixels`` is stored row-major with channels interleaved, so
    ``pixels.ravel()`` is the flat sample sequence.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected H x W x {{1,3}} samples, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError(f"samples must be integers, got {arr.dtype}")
            if arr.min() < 0 or arr.max() > 255:
                raise ValueError("samples must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        arr = np.array(arr, copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @classmethod
    def from_samples(cls, width: int, height: int, channels: int, samples) -> "ImageBuffer":
        flat = np.asarray(samples)
        if flat.size != width * height * channels:
            raise ValueError(
                f"expected {width * height * channels} samples, got {flat.size}"
            )
        return cls(flat.reshape(height, width, channels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def samples(self) -> np.ndarray:
        return self.pixels.ravel()

    def crop(self, x: int, y: int, width: int, height: int) -> "ImageBuffer":
        return ImageBuffer(self.pixels[y : y + height, x : x + width])

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self):
        return f"ImageBuffer({self.width}x{self.height}x{self.channels})"


def _to_buffer(im: Image.Image, source) -> ImageBuffer:
    if im.mode in _HIGH_DEPTH_MODES:
        raise UnsupportedImageError(
            f"{source}: unsupported bit depth (mode {im.mode}); convert to 8-bit first"
        )
    if im.mode not in _MODE_CHANNELS:
        raise UnsupportedImageError(
            f"{source}: unsupported channel count or mode {im.mode}; "
            "convert to 8-bit grayscale or RGB first"
        )
    return ImageBuffer(np.asarray(im))


def load_image(path) -> ImageBuffer:
    """Decode an 8-bit grayscale or RGB raster.

    16-bit, float, palette and alpha sources are rejected rather than
    converted.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            im.load()
            return _to_buffer(im, path)
    except UnidentifiedImageError as exc:
        raise OSError(f"{path}: unreadable image") from exc


def decode_png(data: bytes) -> ImageBuffer:
    with Image.open(io.BytesIO(data)) as im:
        im.load()
        return _to_buffer(im, "<bytes>")


def encode_png(img: ImageBuffer) -> bytes:
    """Losslessly encode to PNG bytes (deterministic for identical input)."""
    arr = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def save_image(img: ImageBuffer, path) -> int:
    """Write ``img`` as PNG and return the file size in bytes."""
    if not str(path):
        raise OSError("empty output path")
    path = Path(path)
    data = encode_png(img)
    with open(path, "wb") as fh:
        fh.write(data)
    return os.path.getsize(path)


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    width: int
    height: int
    bytes: int


@dataclass(frozen=True)
class WorkUnit:
    """A rectangle of a parent image; the whole image when untiled."""

    path: str
    x: int
    y: int
    width: int
    height: int
    parent_width: int
    parent_height: int

    @property
    def unit_id(self) -> str:
        if (self.width, self.height) == (self.parent_width, self.parent_height):
            return self.path
        return f"{self.path}@{self.x},{self.y}"


@dataclass
class DatasetManifest:
    root: str
    entries: list[ManifestEntry] = field(default_factory=list)
    units: list[WorkUnit] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    tile: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "root": self.root,
                "tile": self.tile,
                "entries": [asdict(e) for e in self.entries],
                "units": [asdict(u) for u in self.units],
                "skipped": [list(s) for s in self.skipped],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        raw = json.loads(text)
        return cls(
            root=raw["root"],
            tile=raw.get("tile"),
            entries=[ManifestEntry(**e) for e in raw["entries"]],
            units=[WorkUnit(**u) for u in raw["units"]],
            skipped=[tuple(s) for s in raw["skipped"]],
        )


def tile_rects(width: int, height: int, tile: int | None):
    """Yield (x, y, w, h) tiles in row-major order; edge tiles may be smaller."""
    if tile is None:
        yield 0, 0, width, height
        return
    if tile < 1:
        raise ValueError("tile size must be positive")
    for y in range(0, height, tile):
        for x in range(0, width, tile):
            yield x, y, min(tile, width - x), min(tile, height - y)


def ingest_directory(root, tile: int | None = None) -> DatasetManifest:
    """Recursively enumerate supported rasters under ``root``.

    Paths are stored relative to ``root`` and sorted lexicographically.
    Files that fail to decode are recorded in ``skipped``.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"{root}: not a directory")
    manifest = DatasetManifest(root=str(root), tile=tile)
    paths = sorted(
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in SUPPORTED_SUFFIXES
    )
    if not paths:
        warnings.warn(f"no supported images under {root}", stacklevel=2)
    for rel in paths:
        full = root / rel
        try:
            img = load_image(full)
        except (OSError, ValueError) as exc:
            logger.warning("skipping %s: %s", rel, exc)
            manifest.skipped.append((rel, str(exc)))
            continue
        manifest.entries.append(
            ManifestEntry(rel, img.width, img.height, full.stat().st_size)
        )
        for x, y, w, h in tile_rects(img.width, img.height, tile):
            manifest.units.append(WorkUnit(rel, x, y, w, h, img.width, img.height))
    return manifest
