"""Exception hierarchy.

Validation errors map to CLI exit code 2, feasibility refusals to exit code 3.
"""


class CaldistError(Exception):
    pass


class ValidationError(CaldistError, ValueError):
    """Malformed or inconsistent input."""


class InvalidInstance(ValidationError):
    pass


class EmptySubset(ValidationError):
    pass


class ZeroMass(ValidationError):
    pass


class PartitionMismatch(ValidationError):
    pass


class DomainMismatch(ValidationError):
    pass


class NotUniform(ValidationError):
    pass


class DegenerateInstance(ValidationError):
    pass


class EpsOutOfRange(ValidationError):
    pass


class AllZero(ValidationError):
    pass


class EmptySample(ValidationError):
    pass


class FeasibilityError(CaldistError):
    """The request is well formed but exceeds a configured resource limit."""

    limit_name = "limit"

    def __init__(self, message, limit=None, requested=None):
        super().__init__(message)
        self.limit = limit
        self.requested = requested


class DomainTooLarge(FeasibilityError):
    limit_name = "max_n"


class StateSpaceTooLarge(FeasibilityError):
    limit_name = "max_states"
