import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import array_shapes, arrays

from cfstereo.tensor_ops import (
    avgpool_volume,
    bilinear_upsample2x,
    box_smooth_axis,
    softmax_along_planes,
    trilinear_upsample2x,
)

finite = st.floats(-50, 50, allow_nan=False)


def small_volumes():
    return arrays(np.float64, array_shapes(min_dims=3, max_dims=3, min_side=1, max_side=6), elements=finite)


class TestSoftmax:
    def test_uniform_logits(self):
        p = softmax_along_planes(np.zeros((4, 3, 2)))
        assert np.allclose(p, 0.25)

    def test_shift_invariance(self):
        base = np.array([0.0, 0.7, -1.2, 2.0]).reshape(4, 1, 1)
        shifted = base + 13.5
        assert np.allclose(softmax_along_planes(base), softmax_along_planes(shifted))

    def test_closed_form(self):
        p = softmax_along_planes(np.array([[[0.0]], [[np.log(3.0)]]]))
        assert np.allclose(p[:, 0, 0], [0.25, 0.75])

    def test_nonfinite_reports_pixel(self):
        v = np.zeros((2, 3, 4))
        v[1, 2, 1] = np.nan
        with pytest.raises(ValueError, match=r"\(1, 2, 1\)"):
            softmax_along_planes(v)

    @given(small_volumes())
    @settings(max_examples=40, deadline=None)
    def test_sums_to_one(self, v):
        p = softmax_along_planes(v)
        assert np.all(p > 0) and np.all(p < 1 + 1e-12)
        assert np.allclose(p.sum(axis=0), 1.0, atol=1e-6)


class TestBilinearUpsample:
    def test_constant(self):
        out = bilinear_upsample2x(np.full((3, 5), 2.75))
        assert out.shape == (6, 10)
        assert np.allclose(out, 2.75)

    def test_single_cell_clamps(self):
        assert np.allclose(bilinear_upsample2x(np.array([[7.0]])), 7.0)

    def test_half_pixel_weights(self):
        out = bilinear_upsample2x(np.array([[0.0, 1.0]]))
        assert np.allclose(out, [[0.0, 0.25, 0.75, 1.0], [0.0, 0.25, 0.75, 1.0]])

    @given(arrays(np.float64, array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8), elements=finite))
    @settings(max_examples=40, deadline=None)
    def test_bounded_by_input(self, m):
        out = bilinear_upsample2x(m)
        assert out.min() >= m.min() - 1e-12
        assert out.max() <= m.max() + 1e-12


class TestAvgpool:
    def test_ones(self):
        assert np.allclose(avgpool_volume(np.ones((4, 4, 4))), 1.0)

    def test_block_mean(self):
        out = avgpool_volume(np.arange(8.0).reshape(2, 2, 2))
        assert out.shape == (1, 1, 1)
        assert out[0, 0, 0] == 3.5

    def test_shape_contract_4d(self):
        out = avgpool_volume(np.zeros((3, 16, 32, 64)))
        assert out.shape == (3, 8, 16, 32)

    def test_odd_dims_instruct_padding(self):
        with pytest.raises(ValueError, match="pad"):
            avgpool_volume(np.zeros((3, 4, 5)))

    @given(arrays(np.float64, st.tuples(st.sampled_from([2, 4]), st.sampled_from([2, 4]), st.sampled_from([2, 4])), elements=finite))
    @settings(max_examples=40, deadline=None)
    def test_preserves_global_mean(self, v):
        assert abs(avgpool_volume(v).mean() - v.mean()) < 1e-6


class TestBoxSmooth:
    def test_radius_zero_identity(self):
        a = np.arange(12.0).reshape(3, 4)
        assert np.array_equal(box_smooth_axis(a, 1, 0), a)

    def test_impulse_spreads_thirds(self):
        a = np.zeros((1, 7))
        a[0, 3] = 3.0
        out = box_smooth_axis(a, 1, 1)
        assert np.allclose(out[0], [0, 0, 1, 1, 1, 0, 0])

    def test_edge_clamp_preserves_constant(self):
        a = np.full((2, 5), 4.0)
        assert np.allclose(box_smooth_axis(a, 1, 2), 4.0)


def test_trilinear_matches_bilinear_per_slice():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(3, 4, 5))
    up = trilinear_upsample2x(v)
    assert up.shape == (6, 8, 10)
    # plane-axis constant volume: each doubled plane slice is the 2D upsampling
    c = np.broadcast_to(v[0], (2, 4, 5)).copy()
    up_c = trilinear_upsample2x(c)
    assert np.allclose(up_c[0], bilinear_upsample2x(v[0]))
