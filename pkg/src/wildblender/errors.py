"""Exception hierarchy shared by every module."""


class WildBlenderError(Exception):
    """Base class for all package errors."""


class DomainError(WildBlenderError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class RegionError(WildBlenderError, ValueError):
    """A point is not in the region an operation requires."""


class EscapeError(WildBlenderError):
    """An orbit left the cube (or the modelled part of it)."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class PreconditionError(WildBlenderError, ValueError):
    pass


class ScheduleError(WildBlenderError):
    """A freedom code or assembled chain code violates a required condition."""

    def __init__(self, message, k=None):
        super().__init__(message if k is None else f"k={k}: {message}")
        self.k = k


class ExactnessError(WildBlenderError):
    """A point sits where the perturbation is not saturated, so no exact rule applies."""


class DivergenceError(WildBlenderError, ValueError):
    pass


class SeedError(WildBlenderError):
    def __init__(self, message, k=None):
        super().__init__(message if k is None else f"k={k}: {message}")
        self.k = k


class InsufficientDataError(WildBlenderError):
    pass


class DependencyError(WildBlenderError):
    """A lookup needs a record that was never built."""
