"""Exception hierarchy."""


class DfsddError(Exception):
    """Base class for all package errors."""


class ValidationError(DfsddError, ValueError):
    """Bad argument: wrong shape, out-of-range site, non-Hermitian input, ..."""


class CapacityError(DfsddError):
    """Matrix side length would exceed the configured maximum."""


class BranchError(DfsddError):
    """Unitary logarithm is ambiguous (an eigenphase sits at +-pi)."""


class NumericalError(DfsddError):
    """A quantity that must be non-negative came out negative beyond tolerance."""


class SchedulingError(DfsddError):
    """Control windows do not fit into the pulse interval."""


class IntegratorError(DfsddError):
    """Master-equation integration lost trace or positivity."""


class PropertyViolation(DfsddError):
    """An identity that should hold numerically was violated."""

    def __init__(self, name, value, tolerance):
        super().__init__(f"{name}: violation {value:.3e} exceeds tolerance {tolerance:.1e}")
        self.name = name
        self.value = value
        self.tolerance = tolerance
