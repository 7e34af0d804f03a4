"""Shared exception types for the skelcov library."""


class SkelcovError(Exception):
    """Base class for all library errors."""


class StructuralError(SkelcovError):
    """Malformed data: dangling ids, non-total maps, out-of-range field values."""


class DomainError(SkelcovError):
    """An argument lies outside an operation's domain."""


class InconsistencyError(SkelcovError):
    """Data is individually well-formed but mutually contradictory."""


class TamenessError(SkelcovError):
    """A wildly ramified quantity was needed but no explicit override was given."""


class AmbiguousTieError(SkelcovError):
    """An ultrametric comparison tied, so only a bound is known, not the value."""


class SpecParseError(SkelcovError):
    """A cover specification document could not be parsed."""
