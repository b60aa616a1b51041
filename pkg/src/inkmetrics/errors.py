"""Exception types shared across the toolkit."""


class InkMetricsError(Exception):
    """Base class for all toolkit errors."""


class ParseError(InkMetricsError):
    """Malformed ink interchange document. Message carries line/field context."""


class ValidationError(InkMetricsError):
    """Input violates a documented precondition or invariant."""


class ConfigError(InkMetricsError):
    """Unsupported configuration (basis degree out of range, negative mu, ...)."""


class DegenerateTraceError(ValidationError):
    """Trace has zero total arc length (all points coincident)."""


class DegenerateSymbolError(ValidationError):
    """Symbol collapses to a single point: zero coefficient norm after centering."""


class ExtremumNotFound(InkMetricsError):
    """No critical point of the requested kind exists in [0, 1].

    ``nearest`` carries the nearest any-kind candidate as a diagnostic, or None
    when the curve has no critical points at all.
    """

    def __init__(self, message, nearest=None):
        super().__init__(message)
        self.nearest = nearest


class CatalogError(InkMetricsError):
    """Base class for model-catalog load/save failures."""


class CatalogVersionError(CatalogError):
    """Catalog file declares an unsupported format version."""


class CatalogBasisError(CatalogError):
    """Catalog declares basis parameters the toolkit cannot build."""


class CatalogDuplicateClassError(CatalogError):
    """Catalog contains the same class_id more than once."""
