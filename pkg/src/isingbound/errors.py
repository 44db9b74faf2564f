"""Exception hierarchy shared by all engines."""


class IsingError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(IsingError, ValueError):
    """An input violates a structural invariant (bad edge, bad field, ...)."""


class DomainError(IsingError, ValueError):
    """Arguments are well-formed but outside the operation's domain."""


class CapacityError(IsingError):
    """The request is too large for the exact engine or the memory cap."""


class ImpossibleEventError(IsingError, ValueError):
    """Conditioning on an event of probability zero."""


class ConstructionError(IsingError):
    """A counterexample construction failed (root not bracketed, ...)."""
