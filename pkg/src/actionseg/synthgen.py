"""Synthetic labeled action clips with exact ground truth.

Each clip shows one textured foreground blob moving over a static, weakly
textured background.  Six motion kinds form two families:

    in place:     oscillate_horizontal, oscillate_vertical, expand_contract
    translating:  drift_right, drift_left, flicker

Textures are band-limited sums of seeded sinusoids, so sub-pixel motion is
smooth and gradient magnitudes are controlled: blob pixels pass the
default selection threshold, background pixels mostly do not.  Each kind
also has its own home region of the frame, which keeps the kinds apart in
feature space even where their motion statistics overlap.

Multi-action sequences are built by concatenating clips; the label track
is exact by construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .video_io import FrameSequence, LabelTrack

KINDS = (
    "oscillate_horizontal",
    "oscillate_vertical",
    "expand_contract",
    "drift_right",
    "drift_left",
    "flicker",
)

FAMILY_INPLACE = KINDS[:3]
FAMILY_TRANSLATING = KINDS[3:]

OSC_PERIOD = 24          # frames per oscillation cycle
OSC_AMPLITUDE = 4.0      # px
PULSE_PERIOD = 24
PULSE_RELATIVE = 0.35    # radius swing of expand_contract
PULSE_GROW_FRAMES = 21   # slow growth, then a fast snap back
DRIFT_SPEED = 0.7        # px/frame along the sweep
DRIFT_SWEEP_FRAMES = 21  # frames of forward sweep per cycle
DRIFT_PERIOD = 24        # sweep + fast return
DRIFT_CORRIDOR = DRIFT_SPEED * DRIFT_SWEEP_FRAMES  # px swept before returning
FLICKER_PERIOD = 12

# All motions share a 24-frame cycle, so clips whose duration is a
# multiple of 24 pool phase-complete statistics regardless of length.
# The sweeping motions (drift, pulse) spend most of the cycle moving
# slowly in one direction and snap back in a few frames; the snap is too
# fast for the flow estimator to track, so the mean flow stays signed.
MOTION_CYCLE = 24

DEFAULT_FRAME_RATE = 25.0

# Home anchor (x, y) of each kind as fractions of (cols, rows).  The
# offsets are deliberately small: they separate the kinds' mean feature
# vectors without giving a hard-assignment codebook cell-level cues.
_ANCHORS = {
    "oscillate_horizontal": (0.42, 0.45),
    "oscillate_vertical": (0.58, 0.45),
    "expand_contract": (0.50, 0.61),
    "drift_right": (0.41, 0.53),
    "drift_left": (0.59, 0.53),
    "flicker": (0.50, 0.37),
}

# Blob texture wavelength (px) per kind.  Amplitudes are scaled with the
# wavelength so every kind has the same gradient scale (and therefore a
# similar number of selected pixels); the kinds then differ in second-order
# gradient statistics rather than raw contrast.
_TEXTURE_WL = {
    "oscillate_horizontal": 4.4,
    "oscillate_vertical": 4.8,
    "expand_contract": 5.2,
    "drift_right": 4.6,
    "drift_left": 5.0,
    "flicker": 5.4,
}

_BLOB_RADIUS_FRAC = 0.15
_N_WAVES = 10
_GRADIENT_SCALE = 0.085 * 2.0 * np.pi / 5.0  # amplitude * |k| per wave

# Texture phases drift over time, so a temporal window pools features from
# many phase states; pooled statistics converge to the phase average and
# stay comparable across clips even though each clip draws fresh phases.
_PHASE_DRIFT = (0.35, 0.75)  # rad/frame, magnitude range per wave

# Background clutter: small drifting specks that pass the gradient
# threshold.  They contribute action-independent descriptors everywhere in
# the frame, the way real footage sprinkles interest pixels over the
# background.  Specks teleport to a fresh spot every cycle, so their
# statistics churn quickly compared to the window length.
_SPECKS_PER_KPX = 6.0      # specks per 1000 px of frame area
_SPECK_CONTRAST = 0.45
_SPECK_SIGMA = (0.9, 1.4)  # gaussian radius range, px
_SPECK_SPEED = 0.8         # px/frame
_SPECK_PERIOD = 12         # frames between teleports


@dataclass(frozen=True)
class ActionSpec:
    kind: str
    duration_frames: int
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown action kind {self.kind!r}")
        if self.duration_frames < 8:
            raise ArgumentError("duration_frames must be >= 8")
        if not 0.0 <= self.noise_sigma <= 0.1:
            raise ArgumentError("noise_sigma must lie in [0, 0.1]")


@dataclass(frozen=True)
class StitchSpec:
    segments: list
    seed: int = 0

    def __post_init__(self):
        if len(self.segments) < 2:
            raise ArgumentError("a stitched sequence needs >= 2 segments")


def _fixed_waves(base_wavelength, n_waves, amplitude=None):
    """Evenly oriented wavevectors of one wavelength band."""
    angles = np.pi * (np.arange(n_waves) + 0.31) / n_waves  # avoid pure axes
    wavelengths = base_wavelength * (1.0 + 0.12 * np.arange(n_waves) / n_waves)
    kx = 2.0 * np.pi / wavelengths * np.cos(angles)
    ky = 2.0 * np.pi / wavelengths * np.sin(angles)
    if amplitude is None:
        amps = _GRADIENT_SCALE * wavelengths / (2.0 * np.pi)
    else:
        amps = np.full(n_waves, amplitude)
    return kx, ky, amps


def _texture(kx, ky, amps, phases, xs, ys):
    val = np.zeros_like(xs)
    for j in range(amps.size):
        val += amps[j] * np.sin(kx[j] * xs + ky[j] * ys + phases[j])
    return val


def _sawtooth(t, period, sweep_frames, span):
    """Slow forward sweep over ``span`` px, then a fast return."""
    phase = t % period
    if phase < sweep_frames:
        return span * phase / sweep_frames
    return span * (1.0 - (phase - sweep_frames) / (period - sweep_frames))


class _SpeckField:
    """Drifting background specks, teleporting every _SPECK_PERIOD frames."""

    def __init__(self, rows, cols, rng):
        self.rows, self.cols = rows, cols
        self.n = max(1, int(round(_SPECKS_PER_KPX * rows * cols / 1000.0)))
        self.rng = rng
        self.sign = rng.choice([-1.0, 1.0], size=self.n)
        self.sigma = rng.uniform(*_SPECK_SIGMA, size=self.n)
        angle = rng.uniform(0.0, 2.0 * np.pi, size=self.n)
        self.vx = _SPECK_SPEED * np.cos(angle)
        self.vy = _SPECK_SPEED * np.sin(angle)
        self.offset = rng.integers(0, _SPECK_PERIOD, size=self.n)
        self._spawns = {}

    def _spawn(self, cycle):
        if cycle not in self._spawns:
            self._spawns[cycle] = (
                self.rng.uniform(0, self.cols, size=self.n),
                self.rng.uniform(0, self.rows, size=self.n),
            )
        return self._spawns[cycle]

    def add_to(self, frame, t, keep_clear=None):
        """Draw the specks at time t; skip any inside the keep_clear disk."""
        rows, cols = frame.shape
        ys, xs = np.mgrid[0:rows, 0:cols].astype(np.float64)
        for i in range(self.n):
            local_t = t + int(self.offset[i])
            cycle, phase = divmod(local_t, _SPECK_PERIOD)
            sx, sy = self._spawn(cycle)
            px = (sx[i] + self.vx[i] * phase) % cols
            py = (sy[i] + self.vy[i] * phase) % rows
            if keep_clear is not None:
                ccx, ccy, cr = keep_clear
                if (px - ccx) ** 2 + (py - ccy) ** 2 < (cr + 3.0) ** 2:
                    continue
            dx = (xs - px + cols / 2.0) % cols - cols / 2.0
            dy = (ys - py + rows / 2.0) % rows - rows / 2.0
            bump = np.exp(-(dx * dx + dy * dy) / (2.0 * self.sigma[i] ** 2))
            frame += self.sign[i] * _SPECK_CONTRAST * bump
        return frame


def _kind_trajectory(kind, t, cx0, cy0, radius):
    """Center and radius of the blob at frame t (0-based)."""
    cx, cy, r = cx0, cy0, radius
    if kind == "oscillate_horizontal":
        cx = cx0 + OSC_AMPLITUDE * np.sin(2.0 * np.pi * t / OSC_PERIOD)
    elif kind == "oscillate_vertical":
        cy = cy0 + OSC_AMPLITUDE * np.sin(2.0 * np.pi * t / OSC_PERIOD)
    elif kind == "expand_contract":
        swing = 2.0 * PULSE_RELATIVE * radius
        r = radius * (1.0 - PULSE_RELATIVE) + _sawtooth(
            t, PULSE_PERIOD, PULSE_GROW_FRAMES, swing)
    elif kind == "drift_right":
        cx = cx0 + _sawtooth(t, DRIFT_PERIOD, DRIFT_SWEEP_FRAMES, DRIFT_CORRIDOR)
    elif kind == "drift_left":
        cx = cx0 - _sawtooth(t, DRIFT_PERIOD, DRIFT_SWEEP_FRAMES, DRIFT_CORRIDOR)
    return cx, cy, r


def make_background(rows: int, cols: int, seed: int = 0) -> np.ndarray:
    """Static, weakly textured background raster."""
    rng = np.random.default_rng(seed)
    bg_kx, bg_ky, bg_amps = _fixed_waves(9.0, n_waves=3, amplitude=0.045)
    ys, xs = np.mgrid[0:rows, 0:cols].astype(np.float64)
    tex = _texture(bg_kx, bg_ky, bg_amps, rng.uniform(0, 2 * np.pi, 3), xs, ys)
    return np.clip(0.5 + tex, 0.0, 1.0)


def generate_clip(spec: ActionSpec, rows: int, cols: int, seed: int = 0,
                  background: np.ndarray = None) -> FrameSequence:
    """Render one single-action clip; deterministic for a given seed.

    ``background`` lets stitched sequences share one static scene so that
    segment boundaries change only the foreground.
    """
    if rows < 32 or cols < 32:
        raise ArgumentError("frames must be at least 32x32")
    rng = np.random.default_rng(seed)
    bl_kx, bl_ky, bl_amps = _fixed_waves(_TEXTURE_WL[spec.kind], n_waves=_N_WAVES)
    base_phases = rng.uniform(0, 2 * np.pi, _N_WAVES)
    # alternating drift signs keep the net apparent texture motion near
    # zero, so the churn does not bias the flow features of any one clip
    drift = rng.uniform(*_PHASE_DRIFT, size=_N_WAVES)
    drift *= np.where(np.arange(_N_WAVES) % 2 == 0, 1.0, -1.0)

    if background is None:
        background = make_background(rows, cols, seed=rng.integers(2**31))
    elif background.shape != (rows, cols):
        raise ArgumentError("background shape must match (rows, cols)")
    specks = _SpeckField(rows, cols, rng)
    ys, xs = np.mgrid[0:rows, 0:cols].astype(np.float64)

    ax, ay = _ANCHORS[spec.kind]
    cx0, cy0 = ax * cols, ay * rows
    radius = _BLOB_RADIUS_FRAC * min(rows, cols)

    frames = np.empty((spec.duration_frames, rows, cols))
    for t in range(spec.duration_frames):
        cx, cy, r = _kind_trajectory(spec.kind, t, cx0, cy0, radius)
        # toroidal offsets so drifting blobs wrap cleanly
        dx = (xs - cx + cols / 2.0) % cols - cols / 2.0
        dy = (ys - cy + rows / 2.0) % rows - rows / 2.0
        dist = np.hypot(dx, dy)
        alpha = np.clip(r + 0.5 - dist, 0.0, 1.0)  # 1-px anti-aliased rim

        # sample the blob texture in blob-local coordinates so the pattern
        # moves (and, for expand_contract, stretches) with the blob
        scale = radius / r
        tex = _texture(bl_kx, bl_ky, bl_amps, base_phases + drift * t,
                       dx * scale, dy * scale)
        if spec.kind == "flicker":
            m = 1.0 + 0.3 * np.sin(2.0 * np.pi * t / FLICKER_PERIOD)
            blob = 0.5 + m * tex * 1.5 + 0.12 * np.sin(2.0 * np.pi * t / FLICKER_PERIOD)
        else:
            blob = 0.5 + tex * 1.5

        frame = background * (1.0 - alpha) + np.clip(blob, 0.0, 1.0) * alpha
        frame = specks.add_to(frame, t, keep_clear=(cx, cy, r))
        if spec.noise_sigma > 0:
            frame = frame + rng.normal(0.0, spec.noise_sigma, size=frame.shape)
        frames[t] = np.clip(frame, 0.0, 1.0)
    return FrameSequence(frames=frames, frame_rate=DEFAULT_FRAME_RATE)


def stitch(spec: StitchSpec, rows: int, cols: int):
    """Concatenate single-action clips into one labeled sequence.

    Class ids follow the first-appearance order of the segment kinds, the
    same convention the label-CSV loader uses.
    """
    rng = np.random.default_rng(spec.seed)
    background = make_background(rows, cols, seed=int(rng.integers(2**31)))
    seeds = rng.integers(0, 2**63 - 1, size=len(spec.segments))

    class_ids: dict = {}
    chunks = []
    labels = []
    for seg, seg_seed in zip(spec.segments, seeds):
        clip = generate_clip(seg, rows, cols, seed=int(seg_seed),
                             background=background)
        chunks.append(clip.frames)
        if seg.kind not in class_ids:
            class_ids[seg.kind] = len(class_ids) + 1
        labels.extend([class_ids[seg.kind]] * seg.duration_frames)

    seq = FrameSequence(frames=np.concatenate(chunks, axis=0),
                        frame_rate=DEFAULT_FRAME_RATE)
    track = LabelTrack(labels=np.asarray(labels, dtype=np.int64),
                       class_names=list(class_ids))
    return seq, track


def random_stitch_spec(seed: int, n_segments: int = 6,
                       duration_cycles=(1, 2), noise_sigma: float = 0.02,
                       kinds=KINDS) -> StitchSpec:
    """A family-alternating stitch covering each kind at most once per family pass.

    With the default six segments every kind appears exactly once, so a
    handful of videos gives balanced class coverage.  Segment durations are
    whole motion cycles (multiples of MOTION_CYCLE frames) so pooled
    motion statistics do not depend on the cut phase.
    """
    if n_segments < 2:
        raise ArgumentError("n_segments must be >= 2")
    rng = np.random.default_rng(seed)
    group_a = [k for k in kinds if k in FAMILY_INPLACE]
    group_b = [k for k in kinds if k in FAMILY_TRANSLATING]
    if not group_a or not group_b:
        raise ArgumentError("kinds must span both motion families")

    order = []
    first_a = bool(rng.integers(2))
    pool_a, pool_b = [], []
    for i in range(n_segments):
        take_a = first_a == (i % 2 == 0)
        if take_a:
            if not pool_a:
                pool_a = list(rng.permutation(group_a))
            order.append(pool_a.pop())
        else:
            if not pool_b:
                pool_b = list(rng.permutation(group_b))
            order.append(pool_b.pop())

    segments = [
        ActionSpec(kind=kind,
                   duration_frames=MOTION_CYCLE * int(rng.choice(duration_cycles)),
                   noise_sigma=noise_sigma)
        for kind in order
    ]
    return StitchSpec(segments=segments, seed=int(rng.integers(0, 2**63 - 1)))
