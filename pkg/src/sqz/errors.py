"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent user-supplied configuration."""


class DimensionMismatchError(ValueError):
    """Array shapes incompatible with the grid or with each other."""


class SequencingError(ValueError):
    """Propagator segments combined out of chronological order."""


class NumericalError(RuntimeError):
    """Non-finite values or a failed numerical routine during propagation."""


class BracketingError(RuntimeError):
    """A root/target search failed to bracket the requested value."""
