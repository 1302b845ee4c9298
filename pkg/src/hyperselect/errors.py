"""Exception types shared across the package."""


class HyperSelectError(Exception):
    """Base class for all package errors."""


class InvalidInputError(HyperSelectError, ValueError):
    """An argument violates an operation's precondition."""


class ParseError(HyperSelectError, ValueError):
    """An instance document could not be parsed."""


class ConfigError(HyperSelectError, ValueError):
    """An experiment configuration is inconsistent or incomplete."""


class DomainError(HyperSelectError, RuntimeError):
    """A domain could not apply an action to its current state."""
