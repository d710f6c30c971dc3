"""Exception hierarchy shared by every fperr module."""


class FperrError(Exception):
    """Base class for all errors raised by fperr."""


class UsageError(FperrError, ValueError):
    """An operation was called with arguments that violate its contract."""


class ParseError(UsageError):
    """Malformed number or system text."""

    def __init__(self, message, text, position):
        super().__init__(f"{message} at position {position}: {text!r}")
        self.text = text
        self.position = position


class DomainError(FperrError, ValueError):
    """A value lies outside the mathematical domain of an operation."""


class ConstraintError(FperrError, ValueError):
    """A witness family was requested outside its validity hypotheses."""


class ConfigurationError(FperrError, ValueError):
    """A verification request cannot be carried out (e.g. an infinite slab)."""


class UnsupportedError(FperrError, ValueError):
    """The operation is not defined for this kind of floating point system."""
