"""Grayscale frame-sequence and label-track I/O.

A video lives on disk as a directory of binary (P5) PGM files named
``frame_000001.pgm``, ``frame_000002.pgm``, ... with maxval 255.  In memory
a frame is a float64 array with intensities in [0, 1]; a sequence stacks
the frames into one ``(T, rows, cols)`` array.

Frame labels travel in a CSV with header ``frame,label`` (1-based frame
indices, UTF-8, LF line endings).  Label strings are mapped to integer
class ids in order of first appearance.
"""

import csv
import os
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArgumentError,
    FormatError,
    IoError,
    LengthMismatchError,
    SequenceGapError,
)

_FRAME_NAME_RE = re.compile(r"^frame_(\d{6})\.pgm$")


@dataclass(frozen=True)
class FrameSequence:
    """An ordered stack of equally sized grayscale frames."""

    frames: np.ndarray  # (T, rows, cols), float64 in [0, 1]
    frame_rate: float

    def __post_init__(self):
        if self.frames.ndim != 3 or self.frames.shape[0] < 1:
            raise ArgumentError("frames must be a non-empty (T, rows, cols) array")
        if self.frame_rate <= 0:
            raise ArgumentError("frame_rate must be positive")

    @property
    def T(self) -> int:
        return self.frames.shape[0]

    @property
    def rows(self) -> int:
        return self.frames.shape[1]

    @property
    def cols(self) -> int:
        return self.frames.shape[2]


@dataclass(frozen=True)
class LabelTrack:
    """Per-frame integer class ids (1-based) plus the class-name table."""

    labels: np.ndarray  # (T,), int, values in [1, len(class_names)]
    class_names: list = field(default_factory=list)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ArgumentError("labels must be a 1-D array")
        if labels.size and (labels.min() < 1 or labels.max() > len(self.class_names)):
            raise ArgumentError("labels must lie in [1, len(class_names)]")

    @property
    def T(self) -> int:
        return self.labels.size


def read_pgm(path) -> np.ndarray:
    """Read one binary P5 PGM file into a float64 [0, 1] frame."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch == b"#":  # comment runs to end of line
                eol = data.find(b"\n", pos)
                pos = len(data) if eol < 0 else eol + 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise FormatError(f"{path}: not a binary P5 PGM (magic {magic!r})")
    try:
        cols = int(next_token())
        rows = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PGM header") from exc
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: bad dimensions {rows}x{cols}")
    if not 1 <= maxval <= 255:
        raise FormatError(f"{path}: unsupported maxval {maxval} (8-bit only)")

    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + rows * cols]
    if len(raster) != rows * cols:
        raise FormatError(f"{path}: raster truncated")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(rows, cols)
    return pixels.astype(np.float64) / 255.0


def write_pgm(frame: np.ndarray, path) -> None:
    """Write a [0, 1] frame as a binary P5 PGM with maxval 255."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise ArgumentError("frame must be 2-D")
    raster = np.clip(np.rint(frame * 255.0), 0, 255).astype(np.uint8)
    header = f"P5\n{frame.shape[1]} {frame.shape[0]}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(raster.tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_sequence(dir_path, frame_rate: float) -> FrameSequence:
    """Load a directory of consecutively numbered PGM frames.

    Files must match ``frame_%06d.pgm`` and be numbered 1..T with no gaps.
    """
    try:
        entries = sorted(os.listdir(dir_path))
    except OSError as exc:
        raise IoError(f"cannot list {dir_path}: {exc}") from exc

    indices = {}
    for name in entries:
        m = _FRAME_NAME_RE.match(name)
        if m:
            indices[int(m.group(1))] = name
    if not indices:
        raise SequenceGapError(f"{dir_path}: no frame_%06d.pgm files found")
    expected = set(range(1, max(indices) + 1))
    missing = expected - set(indices)
    if missing or min(indices) != 1:
        raise SequenceGapError(
            f"{dir_path}: frame numbering must be consecutive from 000001 "
            f"(missing {sorted(missing)[:5]}...)"
        )

    frames = []
    shape = None
    for idx in range(1, max(indices) + 1):
        frame = read_pgm(os.path.join(dir_path, indices[idx]))
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise FormatError(
                f"{dir_path}: frame {idx} has shape {frame.shape}, expected {shape}"
            )
        frames.append(frame)
    return FrameSequence(frames=np.stack(frames), frame_rate=float(frame_rate))


def write_sequence(seq: FrameSequence, dir_path) -> None:
    """Write a sequence as the PGM directory layout load_sequence reads."""
    try:
        os.makedirs(dir_path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {dir_path}: {exc}") from exc
    for t in range(seq.T):
        write_pgm(seq.frames[t], os.path.join(dir_path, f"frame_{t + 1:06d}.pgm"))


def rescale(frame: np.ndarray, new_rows: int, new_cols: int) -> np.ndarray:
    """Bilinear resample with edge clamping (pixel-center alignment)."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2:
        raise ArgumentError("frame must be 2-D")
    if new_rows < 2 or new_cols < 2:
        raise ArgumentError("target dimensions must be at least 2x2")
    rows, cols = frame.shape

    ys = (np.arange(new_rows) + 0.5) * rows / new_rows - 0.5
    xs = (np.arange(new_cols) + 0.5) * cols / new_cols - 0.5
    ys = np.clip(ys, 0.0, rows - 1.0)
    xs = np.clip(xs, 0.0, cols - 1.0)

    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, rows - 1)
    x1 = np.minimum(x0 + 1, cols - 1)
    wy = (ys - y0)[:, None]
    wx = (xs - x0)[None, :]

    top = (1.0 - wx) * frame[np.ix_(y0, x0)] + wx * frame[np.ix_(y0, x1)]
    bot = (1.0 - wx) * frame[np.ix_(y1, x0)] + wx * frame[np.ix_(y1, x1)]
    return (1.0 - wy) * top + wy * bot


def rescale_sequence(seq: FrameSequence, new_rows: int, new_cols: int) -> FrameSequence:
    frames = np.stack([rescale(seq.frames[t], new_rows, new_cols) for t in range(seq.T)])
    return FrameSequence(frames=frames, frame_rate=seq.frame_rate)


def load_labels(csv_path, T: int) -> LabelTrack:
    """Load a ``frame,label`` CSV; extra columns are ignored.

    Rows must be numbered 1..T in order.  Label strings become integer ids
    in first-appearance order.
    """
    try:
        with open(csv_path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise IoError(f"cannot read {csv_path}: {exc}") from exc

    if not rows or len(rows[0]) < 2 or rows[0][0] != "frame" or rows[0][1] != "label":
        raise FormatError(f"{csv_path}: expected header starting with 'frame,label'")
    body = rows[1:]
    if len(body) != T:
        raise LengthMismatchError(f"{csv_path}: {len(body)} rows, expected T={T}")

    class_ids: dict = {}
    labels = np.empty(len(body), dtype=np.int64)
    for i, row in enumerate(body):
        if len(row) < 2:
            raise FormatError(f"{csv_path}: row {i + 2} has too few columns")
        try:
            frame_no = int(row[0])
        except ValueError as exc:
            raise FormatError(f"{csv_path}: bad frame index {row[0]!r}") from exc
        if frame_no != i + 1:
            raise FormatError(f"{csv_path}: row {i + 2} has frame {frame_no}, expected {i + 1}")
        name = row[1]
        if name == "":
            raise FormatError(f"{csv_path}: empty label at frame {frame_no}")
        if name not in class_ids:
            class_ids[name] = len(class_ids) + 1
        labels[i] = class_ids[name]
    return LabelTrack(labels=labels, class_names=list(class_ids))


def write_labels(track: LabelTrack, csv_path) -> None:
    """Write a label track as a ``frame,label`` CSV (round-trips exactly)."""
    if track.T < 1:
        raise FormatError("cannot write an empty label track")
    lines = ["frame,label"]
    for i, lab in enumerate(track.labels):
        lines.append(f"{i + 1},{track.class_names[lab - 1]}")
    try:
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {csv_path}: {exc}") from exc
