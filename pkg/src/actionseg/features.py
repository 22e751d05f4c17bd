"""Selective per-pixel spatio-temporal features.

Each interesting pixel of a frame yields a 14-dimensional descriptor:

    [x, y, |Jx|, |Jy|, |Jyy|, |Jxx|, mag, orient, u, v, du, dv, div, vort]

where (x, y) are 1-based pixel coordinates, Jx/Jy/Jxx/Jyy are first and
second order intensity gradients, mag = sqrt(Jx^2 + Jy^2), orient =
atan(|Jy|/|Jx|) in [0, pi/2], (u, v) is dense optical flow, (du, dv) its
temporal difference, and div/vort are the flow divergence and vorticity.

A pixel is interesting when its gradient magnitude exceeds the selection
threshold; the threshold is given in 8-bit intensity units and compared
against magnitudes of [0, 1]-normalized frames, i.e. mag > tau / 255.

All derivatives use central differences with replicate-edge boundaries.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .video_io import FrameSequence

FEATURE_DIM = 14

FEATURE_NAMES = (
    "x", "y", "abs_jx", "abs_jy", "abs_jyy", "abs_jxx", "mag", "orient",
    "u", "v", "du", "dv", "div", "vort",
)


@dataclass(frozen=True)
class GradientField:
    """First and second order intensity gradients of one frame."""

    jx: np.ndarray
    jy: np.ndarray
    jxx: np.ndarray
    jyy: np.ndarray


@dataclass(frozen=True)
class FlowField:
    """Dense optical flow, horizontal (u) and vertical (v), px/frame."""

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def zero(cls, shape) -> "FlowField":
        return cls(u=np.zeros(shape), v=np.zeros(shape))


@dataclass(frozen=True)
class FrameFeatures:
    """Descriptors of the interesting pixels of one frame."""

    frame_index: int  # 1-based
    vectors: np.ndarray  # (N_t, 14)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]


def _check_raster(raster, what="frame"):
    raster = np.asarray(raster, dtype=np.float64)
    if raster.ndim != 2 or raster.shape[0] < 3 or raster.shape[1] < 3:
        raise ArgumentError(f"{what} must be 2-D and at least 3x3")
    return raster


def _dx(raster):
    p = np.pad(raster, ((0, 0), (1, 1)), mode="edge")
    return (p[:, 2:] - p[:, :-2]) / 2.0


def _dy(raster):
    p = np.pad(raster, ((1, 1), (0, 0)), mode="edge")
    return (p[2:, :] - p[:-2, :]) / 2.0


def spatial_gradients(frame) -> GradientField:
    """Central-difference gradients with replicate edges."""
    frame = _check_raster(frame)
    px = np.pad(frame, ((0, 0), (1, 1)), mode="edge")
    py = np.pad(frame, ((1, 1), (0, 0)), mode="edge")
    jx = (px[:, 2:] - px[:, :-2]) / 2.0
    jy = (py[2:, :] - py[:-2, :]) / 2.0
    jxx = px[:, 2:] - 2.0 * frame + px[:, :-2]
    jyy = py[2:, :] - 2.0 * frame + py[:-2, :]
    return GradientField(jx=jx, jy=jy, jxx=jxx, jyy=jyy)


def _hs_derivatives(prev, nxt):
    # Horn-Schunck estimators: forward differences averaged over the
    # 2x2x2 cube spanned by the two frames, replicate edges.
    p1 = np.pad(prev, ((0, 1), (0, 1)), mode="edge")
    p2 = np.pad(nxt, ((0, 1), (0, 1)), mode="edge")
    ex = 0.25 * (
        p1[:-1, 1:] - p1[:-1, :-1] + p1[1:, 1:] - p1[1:, :-1]
        + p2[:-1, 1:] - p2[:-1, :-1] + p2[1:, 1:] - p2[1:, :-1]
    )
    ey = 0.25 * (
        p1[1:, :-1] - p1[:-1, :-1] + p1[1:, 1:] - p1[:-1, 1:]
        + p2[1:, :-1] - p2[:-1, :-1] + p2[1:, 1:] - p2[:-1, 1:]
    )
    et = 0.25 * (
        p2[:-1, :-1] - p1[:-1, :-1] + p2[:-1, 1:] - p1[:-1, 1:]
        + p2[1:, :-1] - p1[1:, :-1] + p2[1:, 1:] - p1[1:, 1:]
    )
    return ex, ey, et


def _neighbor_average(raster):
    p = np.pad(raster, 1, mode="edge")
    return (
        (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]) / 6.0
        + (p[:-2, :-2] + p[:-2, 2:] + p[2:, :-2] + p[2:, 2:]) / 12.0
    )


def optical_flow(prev, nxt, alpha: float = 1.0, max_iter: int = 100,
                 tol: float = 1e-4) -> FlowField:
    """Horn-Schunck dense optical flow from ``prev`` to ``nxt``.

    Jacobi iterations with smoothness weight ``alpha``; stops early once
    the largest per-pixel update falls below ``tol`` px/frame.
    """
    prev = _check_raster(prev, "prev")
    nxt = _check_raster(nxt, "next")
    if prev.shape != nxt.shape:
        raise ArgumentError(f"frame shapes differ: {prev.shape} vs {nxt.shape}")

    ex, ey, et = _hs_derivatives(prev, nxt)
    denom = alpha * alpha + ex * ex + ey * ey

    u = np.zeros_like(prev)
    v = np.zeros_like(prev)
    for _ in range(max_iter):
        ubar = _neighbor_average(u)
        vbar = _neighbor_average(v)
        resid = (ex * ubar + ey * vbar + et) / denom
        u_new = ubar - ex * resid
        v_new = vbar - ey * resid
        delta = max(np.max(np.abs(u_new - u)), np.max(np.abs(v_new - v)))
        u, v = u_new, v_new
        if delta < tol:
            break
    return FlowField(u=u, v=v)


def flow_temporal_derivative(flow_prev: FlowField, flow_cur: FlowField) -> FlowField:
    """Backward difference of two flow fields (cur - prev)."""
    if flow_prev.u.shape != flow_cur.u.shape:
        raise ArgumentError("flow fields must share the same shape")
    return FlowField(u=flow_cur.u - flow_prev.u, v=flow_cur.v - flow_prev.v)


def flow_spatial_terms(flow: FlowField):
    """Divergence (du/dx + dv/dy) and vorticity (dv/dx - du/dy)."""
    u = _check_raster(flow.u, "flow.u")
    v = _check_raster(flow.v, "flow.v")
    if u.shape != v.shape:
        raise ArgumentError("flow components must share the same shape")
    div = _dx(u) + _dy(v)
    vort = _dx(v) - _dy(u)
    return div, vort


def extract_frame_features(frame, grads: GradientField, flow_t: FlowField,
                           dflow_t: FlowField, tau: float,
                           frame_index: int = 0) -> FrameFeatures:
    """Build the 14-D descriptors of all pixels with mag > tau/255."""
    frame = _check_raster(frame)
    rows, cols = frame.shape
    if tau < 0:
        raise ArgumentError("tau must be non-negative")
    for raster in (grads.jx, grads.jy, grads.jxx, grads.jyy, flow_t.u, flow_t.v,
                   dflow_t.u, dflow_t.v):
        if np.asarray(raster).shape != frame.shape:
            raise ArgumentError("all input rasters must share the frame shape")

    mag = np.sqrt(grads.jx ** 2 + grads.jy ** 2)
    mask = mag > (tau / 255.0)
    ys, xs = np.nonzero(mask)
    n = ys.size
    if n == 0:
        return FrameFeatures(frame_index=frame_index,
                             vectors=np.empty((0, FEATURE_DIM)))

    # atan2 of the absolute gradients implements atan(|Jy|/|Jx|) including
    # the Jx = 0 cases: pi/2 when Jy != 0, and 0 when both vanish.
    orient = np.arctan2(np.abs(grads.jy[ys, xs]), np.abs(grads.jx[ys, xs]))
    div, vort = flow_spatial_terms(flow_t)

    vectors = np.column_stack([
        xs + 1.0,
        ys + 1.0,
        np.abs(grads.jx[ys, xs]),
        np.abs(grads.jy[ys, xs]),
        np.abs(grads.jyy[ys, xs]),
        np.abs(grads.jxx[ys, xs]),
        mag[ys, xs],
        orient,
        flow_t.u[ys, xs],
        flow_t.v[ys, xs],
        dflow_t.u[ys, xs],
        dflow_t.v[ys, xs],
        div[ys, xs],
        vort[ys, xs],
    ])
    return FrameFeatures(frame_index=frame_index, vectors=vectors)


def video_features(seq: FrameSequence, tau: float, stride: int = 2) -> dict:
    """Per-frame features for the sampled frames t = 1, 1+stride, ...

    Flow at a sampled frame t is estimated from frame t-1 to frame t
    (zero for t = 1); its temporal derivative is the difference between
    the flows of successive sampled frames (zero at the first).

    Returns ``{frame_index: FrameFeatures}`` with 1-based keys.
    """
    if stride < 1:
        raise ArgumentError("stride must be >= 1")
    out = {}
    prev_flow = FlowField.zero(seq.frames[0].shape)
    for t in range(1, seq.T + 1, stride):
        frame = seq.frames[t - 1]
        if t == 1:
            flow = FlowField.zero(frame.shape)
        else:
            flow = optical_flow(seq.frames[t - 2], frame)
        dflow = flow_temporal_derivative(prev_flow, flow)
        grads = spatial_gradients(frame)
        out[t] = extract_frame_features(frame, grads, flow, dflow, tau,
                                        frame_index=t)
        prev_flow = flow
    return out
