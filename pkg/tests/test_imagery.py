import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from conftest import random_image
from salsmooth.imagery import (
    DatasetManifest,
    ImageBuffer,
    UnsupportedImageError,
    ingest_directory,
    load_image,
    save_image,
    tile_rects,
)


def test_from_samples_layout():
    img = ImageBuffer.from_samples(2, 2, 1, [0, 255, 128, 64])
    assert (img.width, img.height, img.channels) == (2, 2, 1)
    assert img.samples.tolist() == [0, 255, 128, 64]
    assert img.pixels[0, 1, 0] == 255


@pytest.mark.parametrize("shape", [(0, 4, 3), (4, 4, 2), (4, 4, 4)])
def test_rejects_bad_shapes(shape):
    with pytest.raises(ValueError):
        ImageBuffer(np.zeros(shape, dtype=np.uint8))


def test_rejects_out_of_range_samples():
    with pytest.raises(ValueError):
        ImageBuffer(np.full((2, 2), 256))


def test_buffer_is_immutable(rng):
    img = random_image(rng, 4, 4)
    with pytest.raises(ValueError):
        img.pixels[0, 0, 0] = 1


def test_gray_file_round_trip(tmp_path):
    path = tmp_path / "g.png"
    Image.fromarray(np.array([[0, 255], [128, 64]], dtype=np.uint8)).save(path)
    img = load_image(path)
    assert img == ImageBuffer.from_samples(2, 2, 1, [0, 255, 128, 64])


def test_save_load_random_rgb(tmp_path, rng):
    img = random_image(rng, 16, 16)
    size = save_image(img, tmp_path / "x.png")
    assert size == (tmp_path / "x.png").stat().st_size
    assert load_image(tmp_path / "x.png") == img


def test_constant_image_compresses(tmp_path):
    img = ImageBuffer(np.full((64, 64), 77, dtype=np.uint8))
    assert save_image(img, tmp_path / "c.png") < 64 * 64


def test_empty_path_is_io_error(rng):
    with pytest.raises(OSError):
        save_image(random_image(rng, 2, 2), "")


def test_sixteen_bit_source_rejected(tmp_path):
    path = tmp_path / "deep.png"
    Image.fromarray(np.full((4, 4), 4000, dtype=np.uint16)).save(path)
    with pytest.raises(UnsupportedImageError, match="unsupported bit depth"):
        load_image(path)


def test_alpha_source_rejected(tmp_path):
    path = tmp_path / "rgba.png"
    Image.fromarray(np.zeros((4, 4, 4), dtype=np.uint8)).save(path)
    with pytest.raises(UnsupportedImageError, match="channel"):
        load_image(path)


def test_unreadable_file(tmp_path):
    path = tmp_path / "junk.png"
    path.write_bytes(b"not an image")
    with pytest.raises(OSError):
        load_image(path)


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12), st.sampled_from([1, 3]))))
def test_save_load_is_exact_inverse(tmp_path_factory, pixels):
    img = ImageBuffer(pixels)
    path = tmp_path_factory.mktemp("rt") / "img.png"
    save_image(img, path)
    assert load_image(path) == img


def test_tiles_example():
    assert list(tile_rects(100, 100, 64)) == [
        (0, 0, 64, 64), (64, 0, 36, 64), (0, 64, 64, 36), (64, 64, 36, 36)
    ]


@given(st.integers(1, 300), st.integers(1, 300), st.integers(1, 128))
def test_tiles_cover_every_pixel_once(w, h, tile):
    cover = np.zeros((h, w), dtype=int)
    for x, y, tw, th in tile_rects(w, h, tile):
        cover[y : y + th, x : x + tw] += 1
    assert (cover == 1).all()


def _write(path, arr):
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr).save(path)


def test_ingest_three_images(tmp_path, rng):
    for name in ("b/two.png", "a.png", "c/d/three.png"):
        _write(tmp_path / name, rng.integers(0, 256, (5, 7, 3), dtype=np.uint8))
    (tmp_path / "notes.txt").write_text("ignored")
    manifest = ingest_directory(tmp_path)
    assert [e.path for e in manifest.entries] == ["a.png", "b/two.png", "c/d/three.png"]
    assert all((e.width, e.height) == (7, 5) and e.bytes > 0 for e in manifest.entries)
    assert len(manifest.units) == 3


def test_ingest_tiled(tmp_path):
    _write(tmp_path / "big.png", np.zeros((100, 100), dtype=np.uint8))
    manifest = ingest_directory(tmp_path, tile=64)
    assert [(u.width, u.height) for u in manifest.units] == [(64, 64), (36, 64), (64, 36), (36, 36)]
    assert sum(u.width * u.height for u in manifest.units) == 100 * 100
    assert manifest.units[1].unit_id == "big.png@64,0"


def test_ingest_skips_corrupt(tmp_path):
    _write(tmp_path / "ok.png", np.zeros((4, 4), dtype=np.uint8))
    (tmp_path / "bad.png").write_bytes(b"\x89PNG garbage")
    manifest = ingest_directory(tmp_path)
    assert len(manifest.entries) == 1
    assert [s[0] for s in manifest.skipped] == ["bad.png"]


def test_ingest_empty_dir_warns(tmp_path):
    with pytest.warns(UserWarning):
        manifest = ingest_directory(tmp_path)
    assert manifest.entries == []


def test_ingest_deterministic_and_json(tmp_path, rng):
    for i in range(4):
        _write(tmp_path / f"im{i}.png", rng.integers(0, 256, (9, 9), dtype=np.uint8))
    first, second = ingest_directory(tmp_path, tile=4), ingest_directory(tmp_path, tile=4)
    assert first.to_json() == second.to_json()
    restored = DatasetManifest.from_json(first.to_json())
    assert restored.units == first.units
    assert json.loads(first.to_json())["tile"] == 4
