"""Exception hierarchy shared across the package.

The CLI maps these onto stable exit codes: configuration problems exit 2,
unreadable or malformed input files exit 3, domain invariant violations
exit 4.
"""


class PhonoscriptError(Exception):
    """Base class for all package errors."""


class ConfigError(PhonoscriptError):
    """Invalid or incomplete configuration (bad flag values, missing annotations)."""


class DataError(PhonoscriptError):
    """Input file could not be read or contains no usable records."""


class ValidationError(PhonoscriptError):
    """A domain invariant was violated (duplicate ids, bad shapes, unknown ids)."""


class CapacityError(ValidationError):
    """Candidate pool is too small for the requested operation."""
