import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from salsmooth.kernels import kernel_width_for_saliency
from salsmooth.masks import (
    BoxAnnotation,
    SaliencyMask,
    effective_kernel_width,
    effective_width_from_distribution,
    load_mask,
    make_box_mask,
    make_grid_mask,
    make_half_mask,
    make_perlin_mask,
    resample_mask,
    save_mask,
    width_distribution,
)

quantized_masks = st.builds(
    lambda rows, levels: SaliencyMask(np.asarray(levels)[np.asarray(rows)]),
    st.integers(1, 9).flatmap(
        lambda w: st.lists(st.lists(st.integers(0, 3), min_size=w, max_size=w), min_size=1, max_size=9)
    ),
    st.just([0.0, 0.33, 0.66, 1.0]),
)


def test_half_mask_rows():
    m = make_half_mask(4, 2)
    assert m.levels.tolist() == [[1, 1, 0, 0], [1, 1, 0, 0]]
    assert m.level_set == (0.0, 1.0)


def test_half_mask_odd_width_takes_ceiling():
    m = make_half_mask(5, 3)
    assert m.levels[0].tolist() == [1, 1, 1, 0, 0]


def test_half_distribution():
    assert width_distribution(make_half_mask(64, 64)) == {1: 0.5, 17: 0.5}


@given(st.integers(2, 200), st.integers(2, 50))
def test_half_counts_within_one_column(w, h):
    counts = make_half_mask(w, h).level_counts()
    assert abs(counts[1.0] - counts[0.0]) <= h


def test_grid_cells_8x8():
    m = make_grid_mask(8, 8).levels
    cell = lambda r, c: m[2 * r, 2 * c]
    assert (cell(0, 0), cell(0, 1), cell(1, 0), cell(3, 3)) == (0.0, 0.33, 0.33, 0.66)
    # each 2x2 cell is uniform
    assert all(len(np.unique(m[2 * r : 2 * r + 2, 2 * c : 2 * c + 2])) == 1 for r in range(4) for c in range(4))


def test_grid_distribution_and_widths():
    m = make_grid_mask(16, 16)
    assert width_distribution(m) == {1: 0.25, 5: 0.25, 11: 0.25, 17: 0.25}


@given(st.integers(4, 120), st.integers(4, 120))
def test_grid_cell_sizes_differ_by_at_most_one(w, h):
    m = make_grid_mask(w, h).levels
    col_bounds = np.flatnonzero(np.diff(m[0]) != 0) + 1
    widths = np.diff(np.concatenate(([0], col_bounds, [w])))
    assert len(widths) == 4
    assert widths.max() - widths.min() <= 1


@pytest.mark.parametrize("maker, dims", [(make_half_mask, (1, 5)), (make_grid_mask, (3, 8)),
                                         (lambda w, h: make_perlin_mask(w, h, 0), (7, 8))])
def test_degenerate_dims(maker, dims):
    with pytest.raises(ValueError):
        maker(*dims)


def test_perlin_levels_and_widths():
    m = make_perlin_mask(96, 64, seed=3)
    assert set(m.level_set) <= {0.25, 0.5, 0.75, 1.0}
    assert set(width_distribution(m)) <= {1, 5, 9, 13}
    assert min(m.level_set) > 0


def test_perlin_deterministic_and_seeded():
    a, b = make_perlin_mask(64, 64, seed=11), make_perlin_mask(64, 64, seed=11)
    c = make_perlin_mask(64, 64, seed=12)
    assert a == b
    assert a != c


def test_perlin_distribution_is_interior_heavy():
    dist = width_distribution(make_perlin_mask(256, 256, seed=0))
    assert len(dist) == 4
    assert dist[5] + dist[9] > 0.7
    assert dist[1] < 0.15 and dist[13] < 0.15


def test_box_mask_empty():
    m = make_box_mask(10, 6, BoxAnnotation())
    assert m.level_set == (0.0,)


def test_box_mask_full_image():
    m = make_box_mask(20, 10, BoxAnnotation(((0, 0, 20, 10),)))
    assert m.level_set == (0.8,)
    assert effective_kernel_width(m) == 3.0


def test_box_mask_dilation_arithmetic():
    m = make_box_mask(16, 16, BoxAnnotation(((2, 2, 4, 4),), dilation=0.5))
    inside = m.levels == 0.8
    assert inside[0:8, 0:8].all()
    assert inside.sum() == 64


def test_box_mask_overlap_and_clamp():
    ann = BoxAnnotation(((0, 0, 4, 4), (2, 2, 4, 4), (14, 14, 10, 10)), dilation=0.0)
    m = make_box_mask(16, 16, ann, inside=0.9, outside=0.1)
    assert m.level_set == (0.1, 0.9)
    assert (m.levels == 0.9).sum() == 16 + 16 - 4 + 4


def test_box_validation():
    with pytest.raises(ValueError):
        BoxAnnotation(dilation=-1)
    with pytest.raises(ValueError):
        BoxAnnotation(((0, 0, -1, 3),))


def test_mask_validation():
    with pytest.raises(ValueError):
        SaliencyMask(np.array([[1.2]]))
    with pytest.raises(ValueError):
        SaliencyMask(np.arange(17).reshape(1, 17) / 16.0)


def test_resample_identity_and_blocks():
    m = SaliencyMask(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert resample_mask(m, 2, 2) == m
    up = resample_mask(m, 4, 4).levels
    expected = np.kron(m.levels, np.ones((2, 2)))
    np.testing.assert_array_equal(up, expected)


@given(quantized_masks, st.integers(1, 50), st.integers(1, 50))
def test_resample_never_invents_levels(mask, w, h):
    out = resample_mask(mask, w, h)
    assert set(out.level_set) <= set(mask.level_set)
    assert (out.width, out.height) == (w, h)


@settings(max_examples=50)
@given(quantized_masks, st.integers(1, 4), st.integers(1, 4))
def test_effective_width_invariant_under_integer_upscale(mask, fx, fy):
    up = resample_mask(mask, mask.width * fx, mask.height * fy)
    assert effective_kernel_width(up) == pytest.approx(effective_kernel_width(mask), abs=1e-12)


@pytest.mark.parametrize("s", [0.0, 0.33, 0.8, 1.0])
def test_effective_width_constant_mask(s):
    m = SaliencyMask(np.full((5, 7), s))
    assert effective_kernel_width(m) == kernel_width_for_saliency(s)


def test_effective_width_half_and_grid():
    assert effective_kernel_width(make_half_mask(64, 32)) == 9.0
    assert effective_kernel_width(make_grid_mask(64, 64)) == 8.5


def test_effective_width_from_table_distributions():
    perlin = effective_width_from_distribution({1: 0.06, 5: 0.44, 9: 0.42, 13: 0.08})
    assert perlin == pytest.approx(7.08, abs=1e-12)
    assert effective_width_from_distribution({1: 0.5, 17: 0.5}) == 9.0
    with pytest.raises(ValueError):
        effective_width_from_distribution({1: 0.5})


def test_effective_width_bounds():
    m = make_perlin_mask(64, 64, seed=5)
    assert 1 <= effective_kernel_width(m) <= 17


def test_mask_file_round_trip_keeps_exact_levels(tmp_path):
    m = make_grid_mask(20, 12)
    sidecar = save_mask(m, tmp_path / "grid.png")
    assert sidecar.exists()
    back = load_mask(tmp_path / "grid.png")
    assert back == m
    assert 0.33 in back.level_set


def test_mask_file_without_sidecar(tmp_path):
    save_mask(make_half_mask(6, 4), tmp_path / "h.png").unlink()
    back = load_mask(tmp_path / "h.png")
    assert back.level_set == (0.0, 1.0)
