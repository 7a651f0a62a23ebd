"""Exception hierarchy shared by every module."""


class OverlapForgeError(Exception):
    """Base class for all package errors."""


class DomainError(OverlapForgeError, ValueError):
    """An argument lies outside the domain of the operation."""


class NeedsMoreDigits(OverlapForgeError, IndexError):
    """A convergent table is too shallow for the requested query."""


class NeedsMoreRounds(OverlapForgeError):
    """The construction has not been iterated far enough."""


class ResourceCapError(OverlapForgeError):
    """An enumeration or integer-size cap would be exceeded."""


class BitBudgetError(ResourceCapError):
    """Exact-mode integers would exceed the configured bit budget."""


class IncompleteSpecError(OverlapForgeError):
    """An epsilon table was queried beyond its entries without a tail rule."""


class InvariantViolation(OverlapForgeError):
    """A construction invariant failed; this signals a bug or bad input."""


class StateParseError(OverlapForgeError):
    """A state or certificate file is malformed."""


class StateIntegrityError(OverlapForgeError):
    """A state or certificate file parsed but failed inequality replay."""
