"""Exception types shared across the package."""


class SafeBanditError(Exception):
    """Base class for all package-specific failures."""


class EmptySetError(SafeBanditError):
    """An operation required a nonempty set but the set is empty."""


class UnboundedSetError(SafeBanditError):
    """An operation required a bounded polytope but found a recession direction."""


class DegenerateGeometryError(SafeBanditError):
    """No linearly independent constraint subset exists."""


class EnumerationBudgetError(SafeBanditError):
    """Subset enumeration would exceed the configured budget."""


class ConvergenceError(SafeBanditError):
    """An iterative solver exhausted its budget before converging.

    Carries the last iterate and residual for diagnosis.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class GeometryDomainError(SafeBanditError):
    """A geometric quantity was requested outside its domain of definition."""


class PolytopeParseError(SafeBanditError):
    """A polytope text file failed to parse; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ScheduleError(SafeBanditError):
    """The requested phase split T' is infeasible for the horizon."""


class EmptySafeSetError(SafeBanditError):
    """No candidate action passed the conservative safety test."""


class ConfigError(SafeBanditError):
    """Invalid problem or campaign configuration."""
