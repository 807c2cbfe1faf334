"""Exception taxonomy.

Every failure the library raises on purpose derives from :class:`XmkdError`
so callers (and the CLI exit-code mapping) can tell usage problems, data
problems and training failures apart.
"""


class XmkdError(Exception):
    """Base class for all library errors."""


class ConfigError(XmkdError, ValueError):
    """Invalid configuration value, unknown config key, or bad override."""


class DataError(XmkdError, ValueError):
    """Problem with input data (files, shapes, labels, splits)."""


class FormatError(DataError):
    """Malformed tensor file. Carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ManifestError(DataError):
    """Malformed or inconsistent dataset manifest."""


class SplitError(DataError):
    """Dataset too small to split, or invalid split fractions."""


class AugmentError(DataError):
    """Sample layout incompatible with the requested augmentation."""


class DimensionError(XmkdError, ValueError):
    """Tensor shape does not match what a model or op expects."""


class DegenerateEmbeddingError(XmkdError, ValueError):
    """An embedding had (near-)zero norm where a cosine is required."""


class EstimationError(XmkdError, ValueError):
    """A Monte-Carlo estimate was requested with too small a budget."""


class TrainingDivergedError(XmkdError, RuntimeError):
    """A loss term became non-finite during optimization."""

    def __init__(self, term: str, epoch: int | None = None):
        detail = f"loss term '{term}' is non-finite"
        if epoch is not None:
            detail += f" at epoch {epoch}"
        super().__init__(detail)
        self.term = term
        self.epoch = epoch


class CheckpointError(XmkdError, ValueError):
    """Unreadable checkpoint archive or version mismatch."""


class NotFittedError(XmkdError, RuntimeError):
    """An estimator was used before ``fit``."""
