"""Command-line interface.

Subcommands:

    actionseg synth OUT_DIR --n-train 8 --n-test 4 [--seed N]
    actionseg train MANIFEST [--out DIR] [pipeline flags]
    actionseg segment VIDEO_DIR --vocab V --model M --out CSV [--fps F] [flags]
    actionseg eval PRED_CSV TRUTH_CSV [--out JSON]

Pipeline flags (shared by train/segment): --tau, --k, --window-seconds,
--encoder fv|bow, --no-fv-norm, --svm-c, --seed, --rescale RxC, --config.
``--config`` points at a JSON file of PipelineConfig fields; explicit
flags win over the file.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

import argparse
import os
import sys

from . import jsonio, pipeline
from .classify import ModelBundle, load_model, save_model
from .errors import (
    ActionsegError,
    ArgumentError,
    CompatibilityError,
    EmptyWindowError,
    FormatError,
    InsufficientDataError,
    IoError,
    LengthMismatchError,
    NumericalError,
    SequenceGapError,
)
from .segment import evaluate, report_to_dict
from .video_io import load_labels, load_sequence
from .vocab import load_vocabulary, save_vocabulary

_DATA_ERRORS = (
    IoError,
    FormatError,
    SequenceGapError,
    LengthMismatchError,
    InsufficientDataError,
    EmptyWindowError,
    CompatibilityError,
)


def _parse_rescale(text):
    try:
        rows, cols = text.lower().split("x")
        return int(rows), int(cols)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected ROWSxCOLS, got {text!r}")


def _add_pipeline_flags(parser):
    parser.add_argument("--tau", type=float, default=None,
                        help="gradient-magnitude selection threshold, 8-bit units (default 40)")
    parser.add_argument("--k", type=int, default=None,
                        help="vocabulary size (default 64)")
    parser.add_argument("--window-seconds", type=float, default=None,
                        help="temporal window length in seconds (default 1.0)")
    parser.add_argument("--encoder", choices=("fv", "bow"), default=None,
                        help="window encoding (default fv)")
    parser.add_argument("--no-fv-norm", action="store_true",
                        help="disable signed-sqrt + L2 normalization of Fisher vectors")
    parser.add_argument("--svm-c", type=float, default=None,
                        help="SVM regularization constant (default 1.0)")
    parser.add_argument("--seed", type=int, default=None,
                        help="master RNG seed (default 42)")
    parser.add_argument("--rescale", type=_parse_rescale, default=None,
                        metavar="RxC", help="rescale frames to R rows x C cols")
    parser.add_argument("--config", default=None,
                        help="JSON file with PipelineConfig fields; flags win")


def _build_config(args) -> pipeline.PipelineConfig:
    config = pipeline.PipelineConfig()
    if args.config:
        overrides = jsonio.load_file(args.config)
        if not isinstance(overrides, dict):
            raise ArgumentError(f"{args.config}: config must be a JSON object")
        config = pipeline.config_from_dict(config, overrides)
    flag_map = {
        "tau": args.tau,
        "k": args.k,
        "window_seconds": args.window_seconds,
        "encoder": args.encoder,
        "svm_c": args.svm_c,
        "seed": args.seed,
        "rescale": args.rescale,
    }
    overrides = {key: val for key, val in flag_map.items() if val is not None}
    if args.no_fv_norm:
        overrides["fv_norm"] = False
    return pipeline.config_from_dict(config, overrides)


def _cmd_synth(args) -> int:
    manifest = pipeline.make_dataset(args.out_dir, args.n_train, args.n_test,
                                     seed=args.seed)
    print(f"wrote {manifest}")
    return 0


def _cmd_train(args) -> int:
    config = _build_config(args)
    trained = pipeline.train_from_manifest(args.manifest, config)
    out_dir = args.out or os.path.dirname(os.path.abspath(args.manifest))
    os.makedirs(out_dir, exist_ok=True)
    vocab_path = os.path.join(out_dir, "vocab.json")
    model_path = os.path.join(out_dir, "model.json")
    save_vocabulary(trained.vocabulary, vocab_path)
    bundle = ModelBundle(
        svm=trained.bundle.svm,
        platt=trained.bundle.platt,
        class_names=trained.bundle.class_names,
        vocab_ref=os.path.basename(vocab_path),
        encoder=trained.bundle.encoder,
        fv_norm=trained.bundle.fv_norm,
    )
    save_model(bundle, model_path)
    print(f"wrote {vocab_path}")
    print(f"wrote {model_path}")
    return 0


def _cmd_segment(args) -> int:
    config = _build_config(args)
    vocabulary = load_vocabulary(args.vocab)
    bundle = load_model(args.model)
    seq = load_sequence(args.video_dir, args.fps)
    if config.rescale is not None:
        from .video_io import rescale_sequence

        seq = rescale_sequence(seq, *config.rescale)
    track, maxprob, _ = pipeline.segment_sequence(seq, vocabulary, bundle, config)
    out = args.out or os.path.join(args.video_dir, "predicted.csv")
    pipeline.write_prediction_csv(track, maxprob, out)
    print(f"wrote {out}")
    return 0


def _count_rows(csv_path) -> int:
    try:
        with open(csv_path, "r", encoding="utf-8") as fh:
            return max(sum(1 for line in fh if line.strip()) - 1, 0)
    except OSError as exc:
        raise IoError(f"cannot read {csv_path}: {exc}") from exc


def _cmd_eval(args) -> int:
    t_pred = _count_rows(args.pred_csv)
    t_truth = _count_rows(args.truth_csv)
    if t_pred != t_truth:
        raise LengthMismatchError(
            f"{args.pred_csv} has {t_pred} frames, {args.truth_csv} has {t_truth}"
        )
    pred = load_labels(args.pred_csv, t_pred)
    truth = load_labels(args.truth_csv, t_truth)
    report = report_to_dict(evaluate(pred, truth))
    text = jsonio.dumps(report)
    sys.stdout.write(text)
    if args.out:
        jsonio.dump_file(report, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actionseg",
        description="Frame-level action segmentation via probabilistic "
                    "integration of Fisher-vector window classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("out_dir")
    p_synth.add_argument("--n-train", type=int, default=8)
    p_synth.add_argument("--n-test", type=int, default=4)
    p_synth.add_argument("--seed", type=int, default=42)
    p_synth.set_defaults(func=_cmd_synth)

    p_train = sub.add_parser("train", help="train vocabulary and classifier")
    p_train.add_argument("manifest")
    p_train.add_argument("--out", default=None,
                         help="output directory (default: manifest directory)")
    _add_pipeline_flags(p_train)
    p_train.set_defaults(func=_cmd_train)

    p_seg = sub.add_parser("segment", help="label every frame of a video")
    p_seg.add_argument("video_dir")
    p_seg.add_argument("--vocab", required=True)
    p_seg.add_argument("--model", required=True)
    p_seg.add_argument("--out", default=None)
    p_seg.add_argument("--fps", type=float, default=25.0)
    _add_pipeline_flags(p_seg)
    p_seg.set_defaults(func=_cmd_segment)

    p_eval = sub.add_parser("eval", help="score a prediction against ground truth")
    p_eval.add_argument("pred_csv")
    p_eval.add_argument("truth_csv")
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=_cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    try:
        return args.func(args)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ActionsegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
