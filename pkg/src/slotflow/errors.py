"""Exception hierarchy shared across the package."""


class SlotflowError(Exception):
    """Base class for all package errors."""


class ValidationError(SlotflowError, ValueError):
    """Malformed input: unbalanced network, bad bounds, bad parameters."""


class ScheduleParseError(ValidationError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EnumerationLimitError(ValidationError):
    """Instance too large for exhaustive enumeration."""


class InfeasibleError(SlotflowError):
    """No feasible assignment exists for the given capacities.

    ``deficit`` is the number of passengers the max flow could not route;
    ``critical_capacity`` is the smallest feasible uniform capacity.
    """

    def __init__(self, message: str, deficit: int = 0, critical_capacity: int | None = None):
        super().__init__(message)
        self.deficit = deficit
        self.critical_capacity = critical_capacity


class SolverError(SlotflowError):
    """Numerical failure inside an iterative solver."""


class RelationInvalidError(SlotflowError):
    """Baseline waits leave the linear cost window, so TC != alpha * TW."""
