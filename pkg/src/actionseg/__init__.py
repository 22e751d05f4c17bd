"""Frame-level action segmentation and recognition.

A video is processed as overlapping temporal windows; each window's
selective spatio-temporal features are encoded (Fisher vector or BoW
histogram), classified into a calibrated class-probability vector, and
the per-window probabilities are summed at the frame level to label each
frame.
"""

from .classify import (
    LinearSvmModel,
    ModelBundle,
    PlattParams,
    load_model,
    platt_fit,
    predict_proba,
    save_model,
    svm_scores,
    svm_train,
)
from .encode import BowHistogram, FisherVector, bow_encode, fisher_encode, normalize_fv
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
from .features import (
    FEATURE_DIM,
    FEATURE_NAMES,
    FlowField,
    FrameFeatures,
    GradientField,
    extract_frame_features,
    flow_spatial_terms,
    flow_temporal_derivative,
    optical_flow,
    spatial_gradients,
    video_features,
)
from .pipeline import (
    PipelineConfig,
    TrainedPipeline,
    make_dataset,
    segment_sequence,
    train_from_manifest,
)
from .segment import (
    EvalReport,
    TemporalWindow,
    WindowPlan,
    coverage_counts,
    encode_window,
    evaluate,
    integrate,
    plan_windows,
)
from .synthgen import ActionSpec, StitchSpec, generate_clip, random_stitch_spec, stitch
from .video_io import (
    FrameSequence,
    LabelTrack,
    load_labels,
    load_sequence,
    read_pgm,
    rescale,
    rescale_sequence,
    write_labels,
    write_pgm,
    write_sequence,
)
from .vocab import (
    Codebook,
    GmmVocabulary,
    Standardizer,
    TrainingPool,
    build_pool,
    gmm_fit,
    kmeans_fit,
    load_vocabulary,
    posterior,
    sample_gmm,
    save_vocabulary,
)

__version__ = "0.1.0"
