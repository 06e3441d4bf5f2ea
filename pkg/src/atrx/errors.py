"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument is outside the domain an operation accepts."""


class ConfigurationError(ValueError):
    """A receiver configuration violates a structural requirement (e.g. causality)."""


class ConvergenceError(RuntimeError):
    """An iterative routine hit its iteration cap before meeting its tolerance."""
