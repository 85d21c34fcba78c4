"""Multi-modal person clustering."""

from ._radnet import (
    InvalidInput,
    InvalidState,
    IoError,
    NumericalError,
    cluster,
    evaluate,
    generate,
    gradcheck,
    ground_truth,
    train,
)

__all__ = [
    "InvalidInput",
    "InvalidState",
    "IoError",
    "NumericalError",
    "cluster",
    "evaluate",
    "generate",
    "gradcheck",
    "ground_truth",
    "train",
]
