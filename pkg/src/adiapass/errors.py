"""Exception types shared across the package."""


class AdiapassError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(AdiapassError):
    """An input value violates a documented invariant."""


class ConvergenceError(AdiapassError):
    """An iterative routine exceeded its iteration cap."""


class SingularGapError(AdiapassError):
    """The ground-state energy gap is (numerically) degenerate."""


class IntegrationAccuracyError(AdiapassError):
    """A conserved quantity drifted beyond tolerance during integration."""
