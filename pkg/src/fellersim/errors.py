"""Shared exception types."""


class ConfigurationError(ValueError):
    """Invalid parameters, expressions, or declared dimensions."""


class QuadratureError(RuntimeError):
    """A numerical integral failed to converge; the message names it."""


class NumericalConsistencyError(RuntimeError):
    """Two routes to the same quantity disagree beyond tolerance."""


class HypothesisViolationError(RuntimeError):
    """A quantity that the theory requires bounded diverges on the probe grid."""


class IntensityUnderestimateError(RuntimeError):
    """The global jump intensity was exceeded at runtime; re-estimate it."""


class NumericalInstabilityError(RuntimeError):
    """A simulated state became non-finite; the message names the step."""
