"""End-to-end orchestration: dataset synthesis, training, segmentation.

The functions here are thin, deterministic drivers over the library
modules; the command-line interface wraps them one-to-one.

A dataset lives under one root directory:

    root/manifest.json        {"frame_rate", "rows", "cols", "class_names",
                               "train": [{"video", "labels"}, ...],
                               "test":  [...]}
    root/videos/<name>/       PGM frame directories
    root/labels/<name>.csv    per-frame ground truth

Training fits the vocabulary on per-action sampled features and the SVM
on one encoded vector per contiguous single-action segment, then
calibrates per-class sigmoids on 3-fold cross-scores.
"""

import os
from dataclasses import dataclass, replace

import numpy as np

from . import jsonio
from .classify import (
    ModelBundle,
    cross_val_scores,
    platt_fit,
    predict_proba,
    svm_train,
)
from .encode import bow_encode, fisher_encode, normalize_fv
from .errors import ArgumentError, CompatibilityError, IoError
from .features import FEATURE_DIM, video_features
from .segment import encode_window, integrate, plan_windows
from .synthgen import KINDS, random_stitch_spec, stitch
from .video_io import (
    FrameSequence,
    LabelTrack,
    load_labels,
    load_sequence,
    rescale_sequence,
    write_labels,
    write_sequence,
)
from .vocab import Codebook, GmmVocabulary, build_pool, gmm_fit, kmeans_fit

POOL_CAP = 100_000
FV_ALPHA = 0.5


@dataclass(frozen=True)
class PipelineConfig:
    tau: float = 40.0
    k: int = 64
    window_seconds: float = 1.0
    frame_sample_stride: int = 2
    encoder: str = "fv"
    fv_norm: bool = True
    svm_c: float = 1.0
    seed: int = 42
    rescale: tuple = None  # (rows, cols) or None

    def __post_init__(self):
        if self.tau < 0:
            raise ArgumentError("tau must be non-negative")
        if self.k < 1 or self.frame_sample_stride < 1:
            raise ArgumentError("k and frame_sample_stride must be positive")
        if self.window_seconds <= 0 or self.svm_c <= 0:
            raise ArgumentError("window_seconds and svm_c must be positive")
        if self.encoder not in ("fv", "bow"):
            raise ArgumentError(f"encoder must be 'fv' or 'bow', got {self.encoder!r}")
        if self.rescale is not None:
            rows, cols = self.rescale
            if rows < 2 or cols < 2:
                raise ArgumentError("rescale target must be at least 2x2")


def config_from_dict(base: PipelineConfig, overrides: dict) -> PipelineConfig:
    known = {f for f in PipelineConfig.__dataclass_fields__}
    bad = set(overrides) - known
    if bad:
        raise ArgumentError(f"unknown config keys: {sorted(bad)}")
    if "rescale" in overrides and overrides["rescale"] is not None:
        overrides = dict(overrides)
        overrides["rescale"] = tuple(overrides["rescale"])
    return replace(base, **overrides)


def load_manifest(path) -> dict:
    doc = jsonio.load_file(path)
    for key in ("frame_rate", "class_names", "train", "test"):
        if key not in doc:
            raise ArgumentError(f"{path}: manifest is missing {key!r}")
    return doc


def _entry_paths(root, entry):
    return os.path.join(root, entry["video"]), os.path.join(root, entry["labels"])


def _load_video(video_dir, frame_rate, config: PipelineConfig) -> FrameSequence:
    seq = load_sequence(video_dir, frame_rate)
    if config.rescale is not None:
        seq = rescale_sequence(seq, *config.rescale)
    return seq


def make_encoder(vocabulary, config: PipelineConfig):
    """Bind a vocabulary into an encode function plus its output dim."""
    if config.encoder == "fv":
        if not isinstance(vocabulary, GmmVocabulary):
            raise CompatibilityError("fv encoder needs a GMM vocabulary")
        gmm = vocabulary

        def encode(raw):
            fv = fisher_encode(gmm, gmm.standardizer.apply(raw))
            if config.fv_norm:
                fv = normalize_fv(fv, alpha=FV_ALPHA)
            return fv.values

        return encode, 2 * gmm.dim * gmm.K
    if not isinstance(vocabulary, Codebook):
        raise CompatibilityError("bow encoder needs a k-means codebook")
    codebook = vocabulary

    def encode(raw):
        return bow_encode(codebook, codebook.standardizer.apply(raw)).values

    return encode, codebook.K


def _contiguous_runs(labels: np.ndarray):
    """(start, end, label) for each maximal constant run, 1-based inclusive."""
    runs = []
    start = 0
    for i in range(1, labels.size + 1):
        if i == labels.size or labels[i] != labels[start]:
            runs.append((start + 1, i, int(labels[start])))
            start = i
    return runs


def _global_ids(track: LabelTrack, class_names) -> np.ndarray:
    index = {name: i + 1 for i, name in enumerate(class_names)}
    missing = [n for n in track.class_names if n not in index]
    if missing:
        raise ArgumentError(f"labels {missing} not in manifest class_names")
    lut = np.asarray([0] + [index[n] for n in track.class_names], dtype=np.int64)
    return lut[track.labels]


@dataclass(frozen=True)
class TrainedPipeline:
    vocabulary: object  # GmmVocabulary or Codebook
    bundle: ModelBundle


def train_from_manifest(manifest_path, config: PipelineConfig) -> TrainedPipeline:
    """Fit vocabulary, SVM and calibration from a dataset manifest."""
    manifest = load_manifest(manifest_path)
    root = os.path.dirname(os.path.abspath(manifest_path))
    class_names = list(manifest["class_names"])
    frame_rate = float(manifest["frame_rate"])
    if not manifest["train"]:
        raise ArgumentError("manifest has no training videos")

    by_action = {name: [] for name in class_names}
    per_video = []
    for entry in manifest["train"]:
        video_dir, labels_csv = _entry_paths(root, entry)
        seq = _load_video(video_dir, frame_rate, config)
        track = load_labels(labels_csv, seq.T)
        global_labels = _global_ids(track, class_names)
        feats = video_features(seq, config.tau, stride=config.frame_sample_stride)
        per_video.append((feats, global_labels))
        for t, frame_feats in feats.items():
            if frame_feats.count:
                by_action[class_names[global_labels[t - 1] - 1]].append(frame_feats.vectors)

    pooled_by_action = {
        name: np.concatenate(chunks, axis=0)
        for name, chunks in by_action.items()
        if chunks
    }
    pool = build_pool(pooled_by_action, cap=POOL_CAP, seed=config.seed)
    if config.encoder == "fv":
        vocabulary = gmm_fit(pool, config.k, seed=config.seed)
    else:
        vocabulary = kmeans_fit(pool, config.k, seed=config.seed)
    encode, _dim = make_encoder(vocabulary, config)

    samples = []
    for feats, global_labels in per_video:
        for start, end, label in _contiguous_runs(global_labels):
            chunks = [
                feats[t].vectors
                for t in feats
                if start <= t <= end and feats[t].count > 0
            ]
            if not chunks:
                continue  # segment with no interesting pixels at all
            samples.append((encode(np.concatenate(chunks, axis=0)), label))

    A = len(class_names)
    svm = svm_train(samples, A, C=config.svm_c, seed=config.seed)
    scores, sample_labels = cross_val_scores(samples, A, C=config.svm_c,
                                             seed=config.seed)
    platt = platt_fit(scores, sample_labels)
    bundle = ModelBundle(svm=svm, platt=platt, class_names=class_names,
                         vocab_ref="", encoder=config.encoder,
                         fv_norm=config.fv_norm)
    return TrainedPipeline(vocabulary=vocabulary, bundle=bundle)


def segment_sequence(seq: FrameSequence, vocabulary, bundle: ModelBundle,
                     config: PipelineConfig):
    """Label every frame of a sequence with a trained pipeline.

    Returns (track, maxprob, Q): the predicted LabelTrack, the normalized
    winning probability per frame (0 where no window produced features),
    and the raw per-frame accumulators.
    """
    if bundle.encoder != config.encoder:
        raise CompatibilityError(
            f"model was trained with encoder {bundle.encoder!r}, "
            f"config says {config.encoder!r}"
        )
    encode, dim = make_encoder(vocabulary, config)
    if dim != bundle.svm.dim:
        raise CompatibilityError(
            f"encoder output dim {dim} != model dim {bundle.svm.dim} "
            "(vocabulary/model mismatch)"
        )

    feats = video_features(seq, config.tau, stride=config.frame_sample_stride)
    plan = plan_windows(seq.T, seq.frame_rate, config.window_seconds)
    q = []
    for window in plan.windows:
        encoded = encode_window(window, feats, encode)
        if encoded is None:
            q.append(None)
        else:
            q.append(predict_proba(bundle.svm, bundle.platt, encoded))
    Q, labels = integrate(q, plan, seq.T)

    row_sum = Q.sum(axis=1)
    maxprob = np.zeros(seq.T)
    has_mass = row_sum > 0
    maxprob[has_mass] = (
        Q[has_mass, labels[has_mass] - 1] / row_sum[has_mass]
    )
    track = LabelTrack(labels=labels, class_names=list(bundle.class_names))
    return track, maxprob, Q


def write_prediction_csv(track: LabelTrack, maxprob: np.ndarray, path) -> None:
    """Per-frame ``frame,label,maxprob`` CSV (full-precision probabilities)."""
    lines = ["frame,label,maxprob"]
    for i, lab in enumerate(track.labels):
        lines.append(
            f"{i + 1},{track.class_names[lab - 1]},{jsonio.format_float(maxprob[i])}"
        )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def make_dataset(out_dir, n_train: int, n_test: int, seed: int = 42,
                 rows: int = 48, cols: int = 64, n_segments: int = 6,
                 duration_cycles=(2, 3), noise_sigma: float = 0.02) -> str:
    """Synthesize a stitched multi-action dataset; returns the manifest path.

    Deterministic for a given seed, down to the frame bytes.
    """
    if n_train < 1:
        raise ArgumentError("n_train must be >= 1")
    if n_test < 0:
        raise ArgumentError("n_test must be >= 0")
    try:
        os.makedirs(os.path.join(out_dir, "videos"), exist_ok=True)
        os.makedirs(os.path.join(out_dir, "labels"), exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from exc

    rng = np.random.default_rng(seed)
    entries = {"train": [], "test": []}
    for split, count in (("train", n_train), ("test", n_test)):
        for i in range(count):
            name = f"{split}_{i:03d}"
            spec = random_stitch_spec(seed=int(rng.integers(0, 2**63 - 1)),
                                      n_segments=n_segments,
                                      duration_cycles=duration_cycles,
                                      noise_sigma=noise_sigma)
            seq, track = stitch(spec, rows, cols)
            write_sequence(seq, os.path.join(out_dir, "videos", name))
            write_labels(track, os.path.join(out_dir, "labels", f"{name}.csv"))
            entries[split].append(
                {"video": f"videos/{name}", "labels": f"labels/{name}.csv"}
            )

    manifest = {
        "frame_rate": 25.0,
        "rows": rows,
        "cols": cols,
        "class_names": list(KINDS),
        "train": entries["train"],
        "test": entries["test"],
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    jsonio.dump_file(manifest, manifest_path)
    return manifest_path
