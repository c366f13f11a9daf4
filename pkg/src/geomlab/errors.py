"""Exception types shared across the package."""


class GeomlabError(Exception):
    """Base class for all package-specific errors."""


class EvaluationDomainError(GeomlabError, ValueError):
    """An analytic operation was evaluated outside its domain
    (division by zero, sqrt/log of a non-positive value, ...)."""


class SingularMetricError(GeomlabError, ValueError):
    """A candidate metric failed to be positive definite at some
    evaluation point."""


class SingularBoundaryError(GeomlabError, ValueError):
    """A boundary normalization broke down (vanishing gradient of the
    defining function, degenerate induced metric, ...)."""


class ModelRejectedError(GeomlabError, ValueError):
    """A model instance failed one of its build-time self checks."""


class PreconditionError(GeomlabError, ValueError):
    """A documented hypothesis of an operation was violated by its
    arguments (e.g. a vector field that is not conformal Killing where
    one is required)."""


class ConfigError(GeomlabError, ValueError):
    """Bad user-facing configuration (CLI flags, config file keys)."""
