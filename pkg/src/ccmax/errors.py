"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CcmaxError(Exception):
    """Base class for all package-specific errors."""


class DomainError(CcmaxError, ValueError):
    """An argument is outside its documented domain."""


class SizeGuardError(CcmaxError):
    """A computation was refused because it exceeds a hard size guard."""


class FormatError(CcmaxError, ValueError):
    """An input file does not conform to its documented grammar."""
