"""Exception types shared across the estimators."""


class RobustCovError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(RobustCovError, ValueError):
    """A parameter is outside its admissible range."""


class InvalidInputError(RobustCovError, ValueError):
    """Input data violates a precondition (non-finite, wrong shape, ...)."""


class DegenerateSampleError(RobustCovError):
    """The sample carries no usable signal (e.g. all rows zero)."""


class FeasibilityError(RobustCovError):
    """A combinatorial budget or feasibility cap was exceeded."""
