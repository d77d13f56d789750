"""Exception classes shared across the package."""


class HankelSRError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(HankelSRError, ValueError):
    """Invalid argument, grid, or configuration."""


class NumericalError(HankelSRError, RuntimeError):
    """A numerical routine failed to converge or lost accuracy."""
