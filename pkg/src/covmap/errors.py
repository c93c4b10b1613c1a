"""Typed failures shared across the package.

Every expected failure carries a stable machine-readable ``code`` that the
HTTP layer echoes verbatim, and optionally the name of the offending field.
"""

from __future__ import annotations


class AppError(Exception):
    """Base class for anticipated failures (bad input, bad config)."""

    code = "error"

    def __init__(self, message: str, *, field: str | None = None):
        super().__init__(message)
        self.field = field


class MissingField(AppError):
    """A required report field is absent or empty."""

    code = "missing_field"

    def __init__(self, field: str):
        super().__init__(f"missing required field: {field}", field=field)


class OutOfRange(AppError):
    """A field value violates its documented range."""

    code = "out_of_range"

    def __init__(self, field: str, message: str | None = None):
        super().__init__(message or f"value out of range for field: {field}", field=field)


class BadTimestamp(AppError):
    """The timestamp is not a valid, offset-qualified instant."""

    code = "bad_timestamp"

    def __init__(self, message: str):
        super().__init__(message, field="timestamp")


class BadRecord(AppError):
    """A dataset line is not a well-formed record object."""

    code = "bad_record"


class UnknownSite(AppError):
    """A site_id that is not in the configured site list."""

    code = "unknown_site"

    def __init__(self, site_id: str):
        super().__init__(f"unknown site: {site_id}", field="site_id")
        self.site_id = site_id


class BadMetric(AppError):
    code = "bad_metric"


class BadRange(AppError):
    """A half-open time range with from >= to."""

    code = "bad_range"


class BadGrid(AppError):
    """Grid or viewport parameters violate the GridSpec invariants."""

    code = "bad_grid"


class GridTooFine(AppError):
    """Requested cells are smaller on the ground than the privacy floor."""

    code = "grid_too_fine"


class GridTooLarge(AppError):
    """Requested viewport/cell size implies an unreasonable cell count."""

    code = "grid_too_large"


class LatitudeOutOfProjectionDomain(AppError):
    """Latitude beyond the Web-Mercator projection domain."""

    code = "latitude_out_of_projection_domain"

    def __init__(self, message: str):
        super().__init__(message, field="latitude")


class BadConfig(AppError):
    code = "bad_config"


class BadRequest(AppError):
    """Catch-all for malformed request input not covered by a finer code."""

    code = "bad_request"
