"""Exception taxonomy shared across the package."""


class RiskDispatchError(Exception):
    """Base class for all package errors."""


class InputError(RiskDispatchError, ValueError):
    """Invalid argument to an operation (bad shape, out-of-range value)."""


class ValidationError(RiskDispatchError, ValueError):
    """A configuration object violates one of its invariants."""


class ConfigError(RiskDispatchError, ValueError):
    """A config document is malformed or uses unknown keys."""


class FeasibilityError(RiskDispatchError, ValueError):
    """A charge/discharge action would leave the storage capacity bounds."""


class UnsupportedModelError(RiskDispatchError, TypeError):
    """An operation was asked for a distribution family it does not support."""


class SizeError(RiskDispatchError, ValueError):
    """An exhaustive-oracle instance exceeds the enumeration guard."""


class SolverError(RiskDispatchError, RuntimeError):
    """The backward solver failed to produce a value table."""
