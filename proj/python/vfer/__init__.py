"""Video facial expression recognition: metrics, ensembling, training and inference."""

from ._core import (
    Error,
    LoadError,
    InvalidInputError,
    NoValidTargetError,
    ConfigError,
    EnsembleMode,
    ModelBundle,
    confusion_matrix,
    e_total,
    ensemble_combine,
    evaluate_files,
    label_names,
    lr_at_epoch,
    macro_f1,
    masked_cross_entropy,
    middle_frame_index,
    parse_config,
    positional_encoding,
    predict_video,
    read_predictions,
    run_cli,
    serialize_config,
    softmax,
    synthesize,
    total_accuracy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
