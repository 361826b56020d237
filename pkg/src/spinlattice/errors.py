"""Exception hierarchy shared by every module."""


class SpinLatticeError(Exception):
    """Base class."""


class DomainError(SpinLatticeError, ValueError):
    """An argument lies outside the domain of the operation (e.g. a non-unit)."""


class PreconditionError(SpinLatticeError, ValueError):
    """Input data violates a stated precondition."""


class InvariantViolation(SpinLatticeError, AssertionError):
    """An internal post-condition check failed."""


class RankError(SpinLatticeError, ValueError):
    """Singular matrix where a nonsingular one is required."""


class ResourceLimitError(SpinLatticeError, RuntimeError):
    """An exhaustive search or algebra dimension exceeds its hard cap."""
