"""Brain-tumor MRI classifier built on a small C++ CNN core."""

from ._core import (
    Classifier,
    DataError,
    Error,
    InvalidArgument,
    NumericError,
    ShapeError,
    augment,
    focal_loss,
    gradcheck,
    hidden_sizes,
    highpass_enhance,
    median_filter,
    metrics,
    preprocess,
    read_pgm,
    resize,
    softmax,
    split_kfold,
    synthesize,
    write_pgm,
)

__all__ = [
    "Classifier",
    "DataError",
    "Error",
    "InvalidArgument",
    "NumericError",
    "ShapeError",
    "augment",
    "focal_loss",
    "gradcheck",
    "hidden_sizes",
    "highpass_enhance",
    "median_filter",
    "metrics",
    "preprocess",
    "read_pgm",
    "resize",
    "softmax",
    "split_kfold",
    "synthesize",
    "write_pgm",
]
