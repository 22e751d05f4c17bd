"""Sliding-window segmentation: planning, integration, evaluation.

A video of T frames is covered by overlapping windows of L consecutive
frames, successive windows offset by one frame.  Each window yields a
class-probability vector; a frame's accumulated vector is the sum of the
vectors of every window containing it, and its label is the argmax.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .video_io import LabelTrack


@dataclass(frozen=True)
class TemporalWindow:
    t_start: int        # 1-based first frame
    length_frames: int

    @property
    def t_end(self) -> int:
        return self.t_start + self.length_frames - 1

    def contains(self, t: int) -> bool:
        return self.t_start <= t <= self.t_end


@dataclass(frozen=True)
class WindowPlan:
    windows: list
    L_seconds: float
    L_frames: int

    @property
    def S(self) -> int:
        return len(self.windows)


@dataclass(frozen=True)
class EvalReport:
    frame_accuracy: float
    confusion: np.ndarray          # (A, A), row-normalized
    per_class_accuracy: np.ndarray  # (A,)
    class_names: list


def plan_windows(T: int, frame_rate: float, L_seconds: float) -> WindowPlan:
    """Overlapping windows of round(L_seconds * frame_rate) frames.

    The length is clamped to [1, T]; when the video is shorter than one
    window a single window covers it entirely.
    """
    if T < 1:
        raise ArgumentError("T must be >= 1")
    if frame_rate <= 0 or L_seconds <= 0:
        raise ArgumentError("frame_rate and L_seconds must be positive")
    L_frames = int(np.floor(L_seconds * frame_rate + 0.5))  # round half up
    L_frames = max(1, min(L_frames, T))
    windows = [TemporalWindow(t_start=s, length_frames=L_frames)
               for s in range(1, T - L_frames + 2)]
    return WindowPlan(windows=windows, L_seconds=L_seconds, L_frames=L_frames)


def encode_window(window: TemporalWindow, per_frame_features: dict, encode_fn):
    """Pool the sampled frames inside the window and encode them.

    ``per_frame_features`` maps sampled frame index -> FrameFeatures; only
    those frames contribute.  Returns None (the empty marker) when no
    feature vector falls inside the window.
    """
    chunks = [
        feats.vectors
        for t, feats in per_frame_features.items()
        if window.contains(t) and feats.count > 0
    ]
    if not chunks:
        return None
    return encode_fn(np.concatenate(chunks, axis=0))


def integrate(q, plan: WindowPlan, T: int):
    """Sum per-window probability vectors into per-frame accumulators.

    ``q`` holds one probability vector per window, with None marking
    windows that produced no features; those contribute nothing.  Frames
    whose covering windows are all empty inherit the label of the nearest
    labeled frame (the earlier one on ties).  Returns (Q, labels) with Q
    of shape (T, A) and 1-based labels.

    Windows are accumulated in canonical order with compensated summation
    so the result does not depend on scheduling.
    """
    if len(q) != plan.S:
        raise ArgumentError(f"got {len(q)} probability vectors for S={plan.S} windows")
    A = None
    for vec in q:
        if vec is not None:
            vec = np.asarray(vec, dtype=np.float64)
            if A is None:
                A = vec.shape[0]
            elif vec.shape[0] != A:
                raise ArgumentError("probability vectors must share one length")
    if A is None:
        A = 1

    Q = np.zeros((T, A))
    comp = np.zeros((T, A))
    covered = np.zeros(T, dtype=bool)
    for window, vec in zip(plan.windows, q):
        if vec is None:
            continue
        vec = np.asarray(vec, dtype=np.float64)
        lo, hi = window.t_start - 1, min(window.t_end, T)
        y = vec[None, :] - comp[lo:hi]
        t_sum = Q[lo:hi] + y
        comp[lo:hi] = (t_sum - Q[lo:hi]) - y
        Q[lo:hi] = t_sum
        covered[lo:hi] = True

    labels = np.ones(T, dtype=np.int64)
    labels[covered] = np.argmax(Q[covered], axis=1) + 1

    if covered.any() and not covered.all():
        labeled_idx = np.flatnonzero(covered)
        for t in np.flatnonzero(~covered):
            dist = np.abs(labeled_idx - t)
            # earlier frame wins ties: argmin returns the first minimum and
            # labeled_idx is ascending
            labels[t] = labels[labeled_idx[np.argmin(dist)]]
    return Q, labels


def coverage_counts(plan: WindowPlan, T: int) -> np.ndarray:
    """How many windows contain each frame."""
    counts = np.zeros(T, dtype=np.int64)
    for window in plan.windows:
        counts[window.t_start - 1 : min(window.t_end, T)] += 1
    return counts


def _align_tracks(pred: LabelTrack, truth: LabelTrack):
    """Map both tracks onto a shared class table (truth's order first)."""
    names = list(truth.class_names)
    for name in pred.class_names:
        if name not in names:
            names.append(name)
    index = {name: i + 1 for i, name in enumerate(names)}
    pred_ids = np.asarray([index[pred.class_names[l - 1]] for l in pred.labels])
    truth_ids = np.asarray([index[truth.class_names[l - 1]] for l in truth.labels])
    return pred_ids, truth_ids, names


def evaluate(pred: LabelTrack, truth: LabelTrack) -> EvalReport:
    """Frame accuracy plus a row-normalized confusion matrix.

    Rows index the true class, columns the predicted class; a row is
    all-zero when its class never occurs in the ground truth.
    """
    if pred.T != truth.T:
        raise ArgumentError(f"track lengths differ: {pred.T} vs {truth.T}")
    pred_ids, truth_ids, names = _align_tracks(pred, truth)
    A = len(names)

    accuracy = float(np.mean(pred_ids == truth_ids))
    counts = np.zeros((A, A))
    np.add.at(counts, (truth_ids - 1, pred_ids - 1), 1.0)
    row_sums = counts.sum(axis=1)
    confusion = np.divide(counts, row_sums[:, None],
                          out=np.zeros_like(counts), where=row_sums[:, None] > 0)
    return EvalReport(frame_accuracy=accuracy, confusion=confusion,
                      per_class_accuracy=np.diag(confusion).copy(),
                      class_names=names)


def report_to_dict(report: EvalReport) -> dict:
    return {
        "frame_accuracy": report.frame_accuracy,
        "per_class_accuracy": report.per_class_accuracy.tolist(),
        "confusion": report.confusion.tolist(),
        "class_names": list(report.class_names),
    }
