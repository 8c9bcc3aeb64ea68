"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class FlagCalcError(Exception):
    exit_code = 2


class InputError(FlagCalcError, ValueError):
    """Malformed or inconsistent input (bad subset, type mismatch, unknown field...)."""

    exit_code = 2


class ResourceError(FlagCalcError):
    """Request exceeds a configured size cap."""

    exit_code = 3


class ConditioningError(FlagCalcError):
    """Conditioning on an event of probability zero."""

    exit_code = 3


class ConsistencyError(FlagCalcError):
    """A sampled or computed object violates an invariant it was promised to satisfy."""

    exit_code = 3
