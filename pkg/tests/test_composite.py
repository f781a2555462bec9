import itertools

import numpy as np
import pytest

from conftest import random_image
from salsmooth.bench.metrics import compute_mse
from salsmooth.composite import composite_smooth, per_pixel_width_map, plan_composite
from salsmooth.imagery import ImageBuffer
from salsmooth.kernels import KernelSpec, convolve_uniform, kernel_width_for_saliency
from salsmooth.masks import SaliencyMask, make_grid_mask, make_half_mask

LEVELS = np.array([0.0, 0.25, 0.33, 0.5, 0.66, 0.75, 0.8, 1.0])


def random_mask(rng, w, h, n_levels=4) -> SaliencyMask:
    levels = rng.choice(LEVELS, size=n_levels, replace=False)
    return SaliencyMask(levels[rng.integers(0, n_levels, size=(h, w))])


def selection_oracle(img: ImageBuffer, mask: SaliencyMask) -> np.ndarray:
    """Blur the full image at each pixel's own width, pick that pixel."""
    out = np.empty_like(img.pixels)
    blurs = {}
    for y in range(mask.height):
        for x in range(mask.width):
            k = kernel_width_for_saliency(mask.levels[y, x])
            if k not in blurs:
                blurs[k] = convolve_uniform(img, KernelSpec(k)).pixels
            out[y, x] = blurs[k][y, x]
    return out


def test_plan_half():
    plan = plan_composite(make_half_mask(8, 4))
    assert plan.kernel_widths == (1, 17)
    assert plan.n == 2


def test_plan_grid():
    assert plan_composite(make_grid_mask(8, 8)).kernel_widths == (1, 5, 11, 17)


def test_plan_constant():
    plan = plan_composite(SaliencyMask(np.ones((3, 3))))
    assert plan.kernel_widths == (1,)
    assert plan.binary_masks[0].all()


def test_plan_merges_levels_with_same_width():
    m = SaliencyMask(np.array([[0.66, 0.7, 0.74, 1.0]]))
    plan = plan_composite(m)
    assert plan.kernel_widths == (1, 5)
    assert plan.width_for(5).tolist() == [[True, True, True, False]]


def test_plan_masks_partition(rng):
    m = random_mask(rng, 13, 9, 5)
    plan = plan_composite(m)
    stack = np.stack(plan.binary_masks).astype(int)
    assert (stack.sum(axis=0) == 1).all()
    assert plan.n <= len(m.level_set)


def test_width_map_examples():
    hist = np.unique(per_pixel_width_map(make_half_mask(10, 4)), return_counts=True)
    assert hist[0].tolist() == [1, 17] and hist[1].tolist() == [20, 20]
    grid = np.unique(per_pixel_width_map(make_grid_mask(16, 16)), return_counts=True)
    assert grid[0].tolist() == [1, 5, 11, 17] and grid[1].tolist() == [64] * 4
    assert (per_pixel_width_map(SaliencyMask(np.full((3, 4), 0.8))) == 3).all()


def test_all_salient_is_identity(rng):
    img = random_image(rng, 20, 11)
    assert composite_smooth(img, SaliencyMask(np.ones((11, 20)))) == img


def test_constant_image_any_mask(rng):
    img = ImageBuffer(np.full((16, 16, 3), 93, dtype=np.uint8))
    assert composite_smooth(img, random_mask(rng, 16, 16)) == img


def test_half_mask_selects_halves(rng):
    img = random_image(rng, 24, 10)
    out = composite_smooth(img, make_half_mask(24, 10)).pixels
    blurred = convolve_uniform(img, KernelSpec(17)).pixels
    np.testing.assert_array_equal(out[:, :12], img.pixels[:, :12])
    np.testing.assert_array_equal(out[:, 12:], blurred[:, 12:])


def test_matches_selection_oracle(rng):
    for _ in range(10):
        img = random_image(rng, 12, 9, c=int(rng.choice([1, 3])))
        mask = random_mask(rng, 12, 9, int(rng.integers(1, 6)))
        np.testing.assert_array_equal(composite_smooth(img, mask).pixels, selection_oracle(img, mask))


def test_worker_count_does_not_change_output(rng):
    img = random_image(rng, 32, 32)
    mask = make_grid_mask(32, 32)
    assert composite_smooth(img, mask, workers=1) == composite_smooth(img, mask, workers=4)


def test_dimension_mismatch(rng):
    with pytest.raises(ValueError, match="resample"):
        composite_smooth(random_image(rng, 8, 8), make_half_mask(9, 8))


def test_salient_region_has_zero_error(rng):
    img = random_image(rng, 32, 32)
    for mask in (make_half_mask(32, 32), make_grid_mask(32, 32), random_mask(rng, 32, 32)):
        if 1.0 not in mask.level_set:
            continue
        out = composite_smooth(img, mask)
        assert compute_mse(out, img, mask.levels == 1.0) == 0.0


def test_raising_saliency_never_increases_error():
    # smooth synthetic scene: 2x2 block regions, exhaustive over ordered mask pairs
    y, x = np.mgrid[0:8, 0:8]
    scene = (127 + 60 * np.sin(x / 1.7) * np.cos(y / 2.3) + 8 * ((x + y) % 3)).astype(np.uint8)
    img = ImageBuffer(np.repeat(scene[:, :, None], 3, axis=2))
    choices = (0.0, 0.5, 1.0)
    blocks = np.kron(np.arange(4).reshape(2, 2), np.ones((4, 4), dtype=int))

    def sse(assignment):
        mask = SaliencyMask(np.asarray(assignment)[blocks])
        diff = composite_smooth(img, mask).pixels.astype(int) - img.pixels
        return int((diff * diff).sum())

    cache = {a: sse(a) for a in itertools.product(choices, repeat=4)}
    for low, high in itertools.product(cache, repeat=2):
        if all(h >= lo for lo, h in zip(low, high)):
            assert cache[high] <= cache[low]
