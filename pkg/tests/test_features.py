import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from actionseg.errors import ArgumentError
from actionseg.features import (
    FEATURE_DIM,
    FlowField,
    extract_frame_features,
    flow_spatial_terms,
    flow_temporal_derivative,
    optical_flow,
    spatial_gradients,
    video_features,
)
from actionseg.video_io import FrameSequence


def oracle_gradients(frame):
    """Direct loop evaluation of the central-difference stencils."""
    rows, cols = frame.shape
    jx = np.zeros_like(frame)
    jy = np.zeros_like(frame)
    jxx = np.zeros_like(frame)
    jyy = np.zeros_like(frame)
    get = lambda y, x: frame[min(max(y, 0), rows - 1), min(max(x, 0), cols - 1)]
    for y in range(rows):
        for x in range(cols):
            jx[y, x] = (get(y, x + 1) - get(y, x - 1)) / 2.0
            jy[y, x] = (get(y + 1, x) - get(y - 1, x)) / 2.0
            jxx[y, x] = get(y, x + 1) - 2 * get(y, x) + get(y, x - 1)
            jyy[y, x] = get(y + 1, x) - 2 * get(y, x) + get(y - 1, x)
    return jx, jy, jxx, jyy


class TestSpatialGradients:
    def test_constant_frame(self):
        g = spatial_gradients(np.full((5, 5), 0.3))
        for raster in (g.jx, g.jy, g.jxx, g.jyy):
            np.testing.assert_array_equal(raster, 0.0)

    def test_horizontal_ramp(self):
        xs = np.tile(np.arange(6, dtype=float), (5, 1))
        g = spatial_gradients(0.1 * xs)
        np.testing.assert_allclose(g.jx[:, 1:-1], 0.1)
        np.testing.assert_allclose(g.jy, 0.0)
        np.testing.assert_allclose(g.jxx[:, 1:-1], 0.0, atol=1e-15)
        np.testing.assert_allclose(g.jyy, 0.0)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(5)
        for shape in [(5, 5), (7, 12), (16, 16)]:
            frame = rng.uniform(0, 1, shape)
            g = spatial_gradients(frame)
            jx, jy, jxx, jyy = oracle_gradients(frame)
            np.testing.assert_array_equal(g.jx, jx)
            np.testing.assert_array_equal(g.jy, jy)
            np.testing.assert_array_equal(g.jxx, jxx)
            np.testing.assert_array_equal(g.jyy, jyy)

    def test_too_small(self):
        with pytest.raises(ArgumentError):
            spatial_gradients(np.zeros((2, 5)))


class TestOpticalFlow:
    def test_no_motion_gives_zero(self):
        rng = np.random.default_rng(2)
        frame = rng.uniform(0, 1, (16, 16))
        flow = optical_flow(frame, frame)
        np.testing.assert_array_equal(flow.u, 0.0)
        np.testing.assert_array_equal(flow.v, 0.0)

    def test_translation_recovered(self):
        # high-contrast smooth texture shifted right by exactly one pixel
        rng = np.random.default_rng(7)
        base = gaussian_filter(rng.uniform(0, 1, (64, 64)), 1.2, mode="wrap")
        tex = gaussian_filter((base > np.median(base)).astype(float), 0.7, mode="wrap")
        flow = optical_flow(tex, np.roll(tex, 1, axis=1))
        interior = (slice(8, -8), slice(8, -8))
        assert 0.7 <= np.median(flow.u[interior]) <= 1.3
        assert -0.3 <= np.median(flow.v[interior]) <= 0.3

    def test_brightness_step_stays_finite(self):
        flow = optical_flow(np.full((8, 8), 0.2), np.full((8, 8), 0.8))
        assert np.all(np.isfinite(flow.u)) and np.all(np.isfinite(flow.v))

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        a = rng.uniform(0, 1, (12, 12))
        b = rng.uniform(0, 1, (12, 12))
        f1 = optical_flow(a, b)
        f2 = optical_flow(a, b)
        np.testing.assert_array_equal(f1.u, f2.u)
        np.testing.assert_array_equal(f1.v, f2.v)

    def test_shape_mismatch(self):
        with pytest.raises(ArgumentError):
            optical_flow(np.zeros((5, 5)), np.zeros((5, 6)))


class TestFlowDerivatives:
    def test_identical_flows_zero(self):
        f = FlowField(u=np.ones((4, 4)), v=np.zeros((4, 4)))
        d = flow_temporal_derivative(f, f)
        np.testing.assert_array_equal(d.u, 0.0)
        np.testing.assert_array_equal(d.v, 0.0)

    def test_zero_prev_is_identity(self):
        rng = np.random.default_rng(9)
        f = FlowField(u=rng.normal(size=(5, 5)), v=rng.normal(size=(5, 5)))
        d = flow_temporal_derivative(FlowField.zero((5, 5)), f)
        np.testing.assert_array_equal(d.u, f.u)
        np.testing.assert_array_equal(d.v, f.v)

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(10)
        a = FlowField(u=rng.normal(size=(6, 7)), v=rng.normal(size=(6, 7)))
        b = FlowField(u=rng.normal(size=(6, 7)), v=rng.normal(size=(6, 7)))
        d = flow_temporal_derivative(a, b)
        for y in range(6):
            for x in range(7):
                assert d.u[y, x] == b.u[y, x] - a.u[y, x]
                assert d.v[y, x] == b.v[y, x] - a.v[y, x]


class TestFlowSpatialTerms:
    def test_uniform_flow(self):
        flow = FlowField(u=np.full((5, 5), 3.0), v=np.full((5, 5), -2.0))
        div, vort = flow_spatial_terms(flow)
        np.testing.assert_array_equal(div, 0.0)
        np.testing.assert_array_equal(vort, 0.0)

    def test_linear_field(self):
        ys, xs = np.mgrid[0:7, 0:7].astype(float)
        div, vort = flow_spatial_terms(FlowField(u=xs, v=ys))
        np.testing.assert_allclose(div[1:-1, 1:-1], 2.0)
        np.testing.assert_allclose(vort[1:-1, 1:-1], 0.0)

    def test_matches_oracle(self):
        rng = np.random.default_rng(12)
        flow = FlowField(u=rng.normal(size=(8, 9)), v=rng.normal(size=(8, 9)))
        div, vort = flow_spatial_terms(flow)
        ju = oracle_gradients(flow.u)
        jv = oracle_gradients(flow.v)
        np.testing.assert_array_equal(div, ju[0] + jv[1])
        np.testing.assert_array_equal(vort, jv[0] - ju[1])


class TestExtractFrameFeatures:
    def _inputs(self, frame):
        grads = spatial_gradients(frame)
        zero = FlowField.zero(frame.shape)
        return grads, zero, zero

    def test_constant_frame_selects_nothing(self):
        frame = np.full((8, 8), 0.5)
        grads, flow, dflow = self._inputs(frame)
        feats = extract_frame_features(frame, grads, flow, dflow, tau=40.0)
        assert feats.count == 0

    def test_bright_pixel_neighborhood(self):
        frame = np.zeros((9, 9))
        frame[4, 4] = 1.0
        grads, flow, dflow = self._inputs(frame)
        feats = extract_frame_features(frame, grads, flow, dflow, tau=40.0)
        assert feats.count > 0
        assert np.all(feats.vectors[:, 6] > 40.0 / 255.0)
        # selected pixels cluster around (5, 5) in 1-based coordinates
        assert np.all(np.abs(feats.vectors[:, 0] - 5) <= 1)
        assert np.all(np.abs(feats.vectors[:, 1] - 5) <= 1)

    def test_count_matches_threshold_scan(self):
        rng = np.random.default_rng(8)
        frame = np.zeros((16, 16))
        frame[5:11, 5:11] = rng.uniform(0.5, 1.0, (6, 6))
        grads, flow, dflow = self._inputs(frame)
        feats = extract_frame_features(frame, grads, flow, dflow, tau=40.0)
        expected = 0
        for y in range(16):
            for x in range(16):
                mag = np.hypot(grads.jx[y, x], grads.jy[y, x])
                expected += int(mag > 40.0 / 255.0)
        assert feats.count == expected

    def test_mag_consistent_with_gradients(self):
        rng = np.random.default_rng(21)
        frame = rng.uniform(0, 1, (12, 12))
        grads, flow, dflow = self._inputs(frame)
        feats = extract_frame_features(frame, grads, flow, dflow, tau=10.0)
        xs = feats.vectors[:, 0].astype(int) - 1
        ys = feats.vectors[:, 1].astype(int) - 1
        mags = np.sqrt(grads.jx[ys, xs] ** 2 + grads.jy[ys, xs] ** 2)
        np.testing.assert_allclose(feats.vectors[:, 6], mags, atol=1e-12)

    def test_orientation_range_and_singularities(self):
        rng = np.random.default_rng(22)
        frame = rng.uniform(0, 1, (10, 10))
        grads, flow, dflow = self._inputs(frame)
        feats = extract_frame_features(frame, grads, flow, dflow, tau=0.0)
        assert np.all(feats.vectors[:, 7] >= 0.0)
        assert np.all(feats.vectors[:, 7] <= np.pi / 2)
        assert feats.vectors.shape[1] == FEATURE_DIM


class TestVideoFeatures:
    def test_only_odd_frames_sampled(self):
        rng = np.random.default_rng(30)
        frames = rng.uniform(0, 1, (7, 8, 8))
        seq = FrameSequence(frames=frames, frame_rate=25.0)
        feats = video_features(seq, tau=0.0, stride=2)
        assert sorted(feats) == [1, 3, 5, 7]

    def test_first_frame_has_zero_flow(self):
        rng = np.random.default_rng(31)
        frames = rng.uniform(0, 1, (3, 8, 8))
        seq = FrameSequence(frames=frames, frame_rate=25.0)
        feats = video_features(seq, tau=0.0, stride=2)
        first = feats[1].vectors
        np.testing.assert_array_equal(first[:, 8:12], 0.0)
