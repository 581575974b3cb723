"""Exception types shared across the package."""


class TdseLocError(Exception):
    """Base class for all package errors."""


class ContractError(TdseLocError):
    """An operation was handed data in the wrong representation or shape."""


class DomainError(TdseLocError, ValueError):
    """A parameter lies outside its admissible range."""


class NumericError(TdseLocError, ArithmeticError):
    """Non-finite values or a non-converging iteration."""


class UnsupportedOrderError(DomainError):
    """Requested derivative order is above what is implemented."""


class InsufficientDataError(TdseLocError):
    """A trajectory does not cover the requested time range."""


class ResourceError(TdseLocError):
    """A request would exceed the configured size limits."""


class DependencyError(TdseLocError):
    """A lower layer of an iterated construction is missing."""


class ConfigError(TdseLocError):
    """Malformed or inconsistent experiment configuration."""
