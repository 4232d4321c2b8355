"""Exception types shared across the package.

Every domain failure raises a subclass of CbirError so callers (CLI, service)
can map errors to exit codes / HTTP statuses without string matching.
"""


class CbirError(Exception):
    """Base class for all domain errors."""


class UnsupportedFormatError(CbirError):
    """File extension or magic number is not a supported image format."""


class CorruptDataError(CbirError):
    """File claims a supported format but its content cannot be decoded."""


class DimensionMismatchError(CbirError):
    """Two operands that must share a shape or length do not."""


class UndefinedInputError(CbirError):
    """Input for which the operation has no defined value (e.g. zero vector)."""


class NoShapeError(CbirError):
    """Segmentation found no usable foreground region."""


class UnknownMetricError(CbirError):
    """Metric name is not in the supported set."""


class EmptyStoreError(CbirError):
    """Index contains no signatures."""


class ConfigMismatchError(CbirError):
    """Signature or session was produced under a different extraction config."""


class IndexFormatError(CbirError):
    """Index file is corrupt or structurally invalid."""


class IndexVersionError(IndexFormatError):
    """Index file was written with an unsupported format version."""


class EmptyRetrievalError(CbirError):
    """Precision is undefined when nothing was retrieved."""


class NoRelevantSetError(CbirError):
    """Recall is undefined when the relevant set is empty."""


class AllNeutralError(CbirError):
    """Feedback round contained no relevant / not-relevant label."""
