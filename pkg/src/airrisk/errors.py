"""Exception hierarchy shared by every pipeline stage.

Loaders raise :class:`FormatError` for unparsable input and
:class:`InconsistencyError` for input that parses but violates a structural
invariant (duplicate dates, frame shape drift). Analytic degeneracies get
their own classes so the CLI and service can map them to stable exit codes
and HTTP statuses.
"""


class AirriskError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(AirriskError):
    """A file or payload could not be parsed against its schema."""


class ValidationError(AirriskError):
    """A parsed value violates a domain invariant (e.g. negative case count)."""


class InconsistencyError(AirriskError):
    """Records parse individually but disagree with each other."""


class ShapeMismatchError(AirriskError):
    """Grid/mask/matrix shapes that must agree do not."""


class EmptyRegionError(AirriskError):
    """A region mask selects no valid cells."""


class EmptySeriesError(AirriskError):
    """A series that must contain data is empty."""


class AlignmentError(AirriskError):
    """Two bucketed series cannot be brought onto a common bucket range."""


class UndefinedCorrelationError(AirriskError):
    """Pearson correlation is undefined (zero variance in an input)."""


class NoValidDelayError(AirriskError):
    """No delay in the sweep produced a defined correlation with enough pairs."""


class InsufficientOverlapError(AirriskError):
    """Fewer gap-free pairs than the configured minimum overlap."""


class DimensionError(AirriskError):
    """Model and data dimensions do not line up."""


class TrainingDivergedError(AirriskError):
    """Loss became non-finite during training."""


class UnknownSourceError(AirriskError):
    """A scenario override targets a feature source that does not exist."""
