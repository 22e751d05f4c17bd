"""Full pipeline on a small synthetic dataset, library API end to end.

Synthesizes stitched multi-action videos, trains the vocabulary and the
calibrated classifier, labels the held-out videos frame by frame, and
prints per-video accuracy plus the confusion matrix.  Takes a minute or
two; shrink the dataset parameters for a faster run.
"""

import os
import tempfile

import numpy as np

from actionseg import (
    PipelineConfig,
    evaluate,
    load_labels,
    load_sequence,
    make_dataset,
    segment_sequence,
    train_from_manifest,
)
from actionseg.pipeline import load_manifest

with tempfile.TemporaryDirectory() as root:
    manifest_path = make_dataset(root, n_train=4, n_test=2, seed=7,
                                 duration_cycles=(1, 2))
    manifest = load_manifest(manifest_path)
    print(f"dataset: {len(manifest['train'])} train / {len(manifest['test'])} test "
          f"videos, classes: {manifest['class_names']}")

    config = PipelineConfig(k=32)
    trained = train_from_manifest(manifest_path, config)
    print(f"vocabulary: K={trained.vocabulary.K}; "
          f"classifier dim={trained.bundle.svm.dim}")

    reports = []
    for entry in manifest["test"]:
        seq = load_sequence(os.path.join(root, entry["video"]), manifest["frame_rate"])
        truth = load_labels(os.path.join(root, entry["labels"]), seq.T)
        track, maxprob, _ = segment_sequence(seq, trained.vocabulary,
                                             trained.bundle, config)
        report = evaluate(track, truth)
        reports.append(report)
        print(f"{entry['video']}: frame accuracy {report.frame_accuracy:.3f}, "
              f"mean winning probability {maxprob.mean():.3f}")

    print("\nconfusion matrix of the last video (rows = truth):")
    with np.printoptions(precision=2, suppress=True):
        print(reports[-1].confusion)
