"""Input validation helpers shared by the estimators and the data pipeline."""

from __future__ import annotations

import numpy as np

from .errors import DataError, DimensionError

Array = np.ndarray


def check_observations(X, name: str = "X") -> Array:
    """Coerce one modality's observations to float32, samples first.

    Accepts (N, d) feature matrices or (N, C, H, W) image stacks.
    """
    arr = np.asarray(X, dtype=np.float32)
    if arr.ndim not in (2, 4):
        raise DimensionError(
            f"{name} must have shape (N, d) or (N, C, H, W), got {arr.shape}"
        )
    if arr.shape[0] == 0:
        raise DataError(f"{name} contains no samples")
    if not np.isfinite(arr).all():
        raise DataError(f"{name} contains non-finite values")
    return arr


def check_paired(X) -> tuple[Array, Array]:
    """Validate a paired two-modality input ``(X_m1, X_m2)``."""
    if not isinstance(X, (tuple, list)) or len(X) != 2:
        raise DimensionError(
            "paired input must be a (X_m1, X_m2) tuple of two arrays"
        )
    x1 = check_observations(X[0], "X_m1")
    x2 = check_observations(X[1], "X_m2")
    if x1.shape[0] != x2.shape[0]:
        raise DimensionError(
            f"modalities disagree on sample count: {x1.shape[0]} vs {x2.shape[0]}"
        )
    return x1, x2


def check_labels(y, n_classes: int | None = None, name: str = "y") -> Array:
    """Validate integer class labels in ``[0, n_classes)``."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise DataError(f"{name} contains no labels")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(np.asarray(arr, dtype=np.float64))
        if not np.array_equal(rounded, np.asarray(arr, dtype=np.float64)):
            raise DataError(f"{name} must contain integer class indices")
        arr = rounded
    arr = arr.astype(np.int64)
    if arr.min() < 0:
        raise DataError(f"{name} contains negative labels")
    if n_classes is not None and arr.max() >= n_classes:
        raise DataError(
            f"{name} contains label {int(arr.max())} outside [0, {n_classes})"
        )
    return arr


def check_same_length(name_a: str, a, name_b: str, b) -> None:
    if len(a) != len(b):
        raise DimensionError(
            f"{name_a} and {name_b} disagree on length: {len(a)} vs {len(b)}"
        )


def check_image_batch(x: Array, name: str = "x") -> Array:
    """Require image layout (N, C, H, W)."""
    if x.ndim != 4:
        raise DimensionError(f"{name} must be (N, C, H, W) for image ops, got {x.shape}")
    return x
